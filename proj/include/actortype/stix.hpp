#ifndef ACTORTYPE_STIX_HPP
#define ACTORTYPE_STIX_HPP

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "actortype/kb.hpp"
#include "actortype/profile.hpp"
#include "actortype/reasoner.hpp"

namespace actortype {

/// Translation table from external vocabulary values to profile terms.
/// Lookups are exact and case-insensitive on the value; a miss is a value,
/// not an error (record-and-continue).
struct StixMapping {
    struct Rule {
        std::string field; // e.g. resource_level, primary_motivation, motive
        std::string value;
        std::set<std::pair<std::string, std::string>> targets; // (kind, term)
    };
    struct ActorTypeRule {
        std::string value;   // STIX threat-actor-type value
        std::string type_id; // profile type rule id
    };

    std::vector<Rule> rules;
    std::vector<ActorTypeRule> actor_types;

    /// (kind, term) pairs for a field/value, or nullopt when unmapped.
    std::optional<std::set<std::pair<std::string, std::string>>> map_attribute(
        const std::string& field, const std::string& value) const;

    /// Profile type id for a threat-actor-type value, or nullopt.
    std::optional<std::string> map_actor_type(const std::string& value) const;
};

/// Free-function form of StixMapping::map_attribute.
std::optional<std::set<std::pair<std::string, std::string>>> map_value(const StixMapping& mapping,
                                                                        const std::string& field,
                                                                        const std::string& value);

/// Loads and validates a mapping table against a profile (every target term
/// and type id must exist). Throws ParseError / ValidationError.
StixMapping load_mapping(std::istream& source, const Profile& profile);
StixMapping load_mapping_text(const std::string& json_text, const Profile& profile);

/// The embedded table shipped with the library.
const StixMapping& builtin_mapping();

/// What an import did, value by value. Nothing is silently dropped: every
/// input lands in the KB, in this report, or both.
struct ImportReport {
    std::map<std::string, std::size_t> object_counts; // STIX object type -> count seen
    std::size_t actors_imported = 0;
    std::size_t activities_created = 0;
    std::size_t triples_created = 0;
    std::size_t passthrough_objects = 0;
    struct Unmapped {
        std::string field;
        std::string value;
        std::string object_id;
    };
    std::vector<Unmapped> unmapped;
    std::vector<std::string> errors; // per-object failures; import continues
    std::vector<std::string> notes;
    std::vector<LintFinding> lint; // findings for the records this import touched
};

/// Imports a STIX 2.1 bundle: threat-actor SDOs become actors (aliases as
/// known-as triples, threat_actor_types via the mapping, characterization
/// fields as one synthetic activity), relationship objects with registered
/// predicates become triples, everything else is preserved verbatim for
/// re-export.
ImportReport import_stix_bundle(std::istream& source, const StixMapping& mapping,
                                KnowledgeBase& kb);

/// Imports a MISP galaxy threat-actor cluster (array of value objects).
ImportReport import_misp_cluster(std::istream& source, KnowledgeBase& kb);

/// Exports the selected actors plus every passthrough object as a STIX 2.1
/// bundle. Original fields are preserved verbatim; inferred types ride in
/// the x_inferred_actor_types extension property and their traces in note
/// objects referencing the actor. `threat_actor_types` is never touched.
std::string export_stix_bundle(const KnowledgeBase& kb,
                               const std::vector<TypeInference>& inferences,
                               const std::vector<std::string>& actor_ids);

} // namespace actortype

#endif // ACTORTYPE_STIX_HPP
