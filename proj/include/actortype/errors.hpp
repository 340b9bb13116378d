#ifndef ACTORTYPE_ERRORS_HPP
#define ACTORTYPE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace actortype {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& message) : std::runtime_error(message) {}
};

/// Lexical or syntactic failure while parsing DSL text (expressions, queries).
/// Carries a 1-based line:column position.
struct ParseError : Error {
    int line = 0;
    int column = 0;

    ParseError(const std::string& message, int line, int column)
        : Error(message + " at " + std::to_string(line) + ":" + std::to_string(column)),
          line(line),
          column(column) {}
};

/// Referential or invariant failure in domain data (profiles, activities, triples).
struct ValidationError : Error {
    using Error::Error;
};

/// Store file cannot be trusted: bad checksum, truncation, malformed JSON.
struct CorruptStoreError : Error {
    using Error::Error;
};

/// Store file format version differs from the one this build writes.
struct FormatVersionError : Error {
    std::string found;
    std::string expected;

    FormatVersionError(const std::string& found, const std::string& expected)
        : Error("store format version \"" + found + "\" is not supported (this build reads \"" +
                expected + "\")"),
          found(found),
          expected(expected) {}
};

} // namespace actortype

#endif // ACTORTYPE_ERRORS_HPP
