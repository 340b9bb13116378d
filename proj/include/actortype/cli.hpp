#ifndef ACTORTYPE_CLI_HPP
#define ACTORTYPE_CLI_HPP

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "actortype/kb.hpp"
#include "actortype/reasoner.hpp"

namespace actortype {

/// Exit codes: 0 success, 1 domain/validation failure, 2 usage error.
/// Warnings alone leave the code at 0 unless --strict is given.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Timelines for every actor in the KB, keyed by actor id.
std::map<std::string, TypeTimeline> build_timelines(const KnowledgeBase& kb,
                                                    const Profile& profile);

/// The machine-readable classification report (stable key order; identical
/// inputs produce byte-identical text).
std::string classify_report_json(const KnowledgeBase& kb, const Profile& profile,
                                 const std::string& actor_filter = "",
                                 std::size_t near_miss_threshold = 1);

} // namespace actortype

#endif // ACTORTYPE_CLI_HPP
