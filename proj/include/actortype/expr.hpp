#ifndef ACTORTYPE_EXPR_HPP
#define ACTORTYPE_EXPR_HPP

#include <map>
#include <set>
#include <string>
#include <vector>

#include "actortype/expr_ast.hpp"
#include "actortype/profile.hpp"

namespace actortype {

/// Per-activity attribute assertions: kind id -> set of canonical term ids.
/// Kinds that carry no assertion are simply absent (open world: absence is
/// unknown, not false).
struct AttributeProfile {
    std::map<std::string, std::set<std::string>> entries;

    const std::set<std::string>& terms_for(const std::string& kind) const;
    bool empty() const { return entries.empty(); }

    bool operator==(const AttributeProfile& other) const { return entries == other.entries; }
};

/// Validates raw kind->terms assertions against a profile and canonicalizes
/// aliases. Throws ValidationError on unknown kinds or terms.
AttributeProfile make_attribute_profile(
    const Profile& profile, const std::map<std::string, std::set<std::string>>& raw_entries);

/// Per-node record of one evaluation: isomorphic to the expression tree.
/// `expression` is the canonical printed form of the node, so traces stay
/// meaningful on their own. matched_terms (leaves only) lists the observed
/// terms consistent with the restriction, "vocabulary:term"-qualified.
struct SatisfactionTrace {
    std::string expression;
    bool satisfied = false;
    std::vector<std::string> matched_terms;
    std::vector<SatisfactionTrace> children;

    bool operator==(const SatisfactionTrace& other) const {
        return expression == other.expression && satisfied == other.satisfied &&
               matched_terms == other.matched_terms && children == other.children;
    }
};

/// Parses rule-language source into a resolved AST.
///
/// Grammar (whitespace and newlines insignificant, `and` binds tighter
/// than `or`, both left-associative and flattened to n-ary nodes):
///
///   or_expr  := and_expr ("or" and_expr)*
///   and_expr := atom ("and" atom)*
///   atom     := "(" or_expr ")"
///             | property ("value" | "atLeast" | "atMost") qname
///             | property "some" ClassName
///   qname    := prefix ":" term        -- prefix must be the property's vocabulary
///
/// ClassName after `some` must name the property's vocabulary
/// (capitalization-insensitive). Throws ParseError with line:column, or
/// ValidationError for resolution failures carrying position context.
ClassExpression parse_expression(const std::string& source, const Profile& profile);

/// Evaluates an expression against an attribute profile.
///
///   Value(k,t)   : t in attrs[k]
///   Some(k)      : attrs[k] nonempty
///   AtLeast(k,t) : some s in attrs[k] with rank(s) >= rank(t)
///   AtMost(k,t)  : attrs[k] nonempty and every s ranks <= rank(t)
///
/// Evaluation is total and deterministic; missing kinds read as empty sets.
SatisfactionTrace evaluate(const ClassExpression& expr, const AttributeProfile& attrs,
                           const Profile& profile);

} // namespace actortype

#endif // ACTORTYPE_EXPR_HPP
