#include <iostream>
#include <string>
#include <vector>

#include "actortype/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return actortype::run(args, std::cout, std::cerr);
}
