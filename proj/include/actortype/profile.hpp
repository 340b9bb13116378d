#ifndef ACTORTYPE_PROFILE_HPP
#define ACTORTYPE_PROFILE_HPP

#include <cstddef>
#include <istream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "actortype/expr_ast.hpp"

namespace actortype {

/// One controlled-vocabulary entry.
struct Term {
    std::string id; // case-sensitive identifier
    std::string label;
    std::string definition;
    std::set<std::string> aliases;
};

/// A controlled vocabulary. When ordered, list position is the term's rank
/// (0-based, strictly increasing severity/level).
struct Vocabulary {
    std::string id;
    bool ordered = false;
    std::vector<Term> terms;

    /// Canonical term id for an id or alias; nullopt when unknown.
    std::optional<std::string> resolve(const std::string& id_or_alias) const;
    const Term* find(const std::string& canonical_id) const;
};

/// How many values an attribute kind may carry on one activity.
/// max == unbounded() means "no upper limit".
struct Cardinality {
    std::size_t min = 0;
    std::size_t max = 1;

    static constexpr std::size_t unbounded() { return static_cast<std::size_t>(-1); }
    bool max_unbounded() const { return max == unbounded(); }

    /// Table-style annotation: "(1)", "(1-2)", "(1 or more)", "(0 or more)".
    std::string annotation() const;
};

/// Registry entry tying an attribute kind to its object property, vocabulary,
/// and cardinality.
struct AttributeKind {
    std::string kind;          // e.g. definingMotivation
    std::string property_name; // e.g. hasDefiningMotivationAttribute
    std::string vocabulary;    // vocabulary id, e.g. motivation
    Cardinality cardinality;
};

enum class Hostility { Hostile, NonHostile };

/// A threat-actor-type rule: satisfied attribute combinations realize the type.
struct TypeRule {
    std::string id;
    std::string label;
    Hostility hostility = Hostility::Hostile;
    std::string expression_source; // DSL text as loaded
    ClassExpression expression;    // parsed against the owning profile
    std::string source;            // citation for the characterization
};

/// A versioned characterization profile: vocabularies, the attribute
/// registry, and the type rules. Immutable after load; safe to share
/// across concurrent readers.
struct Profile {
    std::string profile_version;
    std::vector<Vocabulary> vocabularies;
    std::vector<AttributeKind> attributes;
    std::vector<TypeRule> types;

    const Vocabulary* find_vocabulary(const std::string& id) const;
    const AttributeKind* find_kind(const std::string& kind) const;
    const AttributeKind* find_property(const std::string& property_name) const;
    const TypeRule* find_type(const std::string& type_id) const;
};

/// Parses and fully validates a profile document (UTF-8 JSON).
/// Every rule expression is parsed and resolved; term aliases are
/// canonicalized. Throws ParseError or ValidationError.
Profile load_profile(std::istream& source);
Profile load_profile_text(const std::string& json_text);

/// Serializes a profile back to its document form. load(serialize(p)) == p.
std::string serialize_profile(const Profile& profile);

/// 0-based position of a term (or alias) in an ordered vocabulary's
/// declared order. Throws ValidationError for unordered vocabularies or
/// unknown terms.
std::size_t term_rank(const Profile& profile, const std::string& vocabulary,
                      const std::string& term);

/// The embedded library of 21 threat-actor types over 8 vocabularies.
/// Identical to loading the shipped profiles/tal.json.
const Profile& builtin_profile();

/// Raw JSON text of the embedded profile.
const std::string& builtin_profile_json();

bool operator==(const Profile& a, const Profile& b);

} // namespace actortype

#endif // ACTORTYPE_PROFILE_HPP
