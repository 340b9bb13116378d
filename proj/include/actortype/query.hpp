#ifndef ACTORTYPE_QUERY_HPP
#define ACTORTYPE_QUERY_HPP

#include <map>
#include <string>
#include <vector>

#include "actortype/kb.hpp"
#include "actortype/reasoner.hpp"

namespace actortype {

/// One filter condition. Ordering operators are valid only on start/end;
/// every other field takes = or != (set-valued fields match existentially
/// for = and by universal non-membership for !=).
struct Condition {
    enum class Field { InferredType, AssertedType, Attribute, Start, End, Alias, Actor };
    enum class Op { Eq, Ne, Ge, Le, Gt, Lt };

    Field field = Field::InferredType;
    std::string attribute_kind; // Field::Attribute only
    Op op = Op::Eq;
    std::string value;
    Timestamp timestamp; // parsed value for Start/End conditions
};

/// A conjunctive filter over actors or activities.
struct Query {
    enum class Target { Actors, Activities };
    Target target = Target::Actors;
    std::vector<Condition> conjuncts; // never empty
};

/// Parses `target "where" cond ("and" cond)*` where cond is `field op value`.
/// Fields: inferred_type, asserted_type, attribute.<kind>, start, end,
/// alias, actor. Values may be quoted ("Lazarus Group") when they contain
/// spaces; start/end values must be RFC 3339 dates or date-times.
/// Throws ParseError with position, including unknown-field and ill-typed
/// operator/value failures.
Query parse_query(const std::string& source);

/// One result row: the record id plus a few projected fields.
struct QueryRow {
    std::string id;
    std::map<std::string, std::string> fields;
};

/// Runs a query over the KB plus precomputed timelines (built with the
/// active profile). Conjunctive semantics; alias conditions traverse the
/// known-as closure; results are ordered by id.
std::vector<QueryRow> run_query(const Query& query, const KnowledgeBase& kb,
                                const std::map<std::string, TypeTimeline>& timelines);

} // namespace actortype

#endif // ACTORTYPE_QUERY_HPP
