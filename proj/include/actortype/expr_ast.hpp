#ifndef ACTORTYPE_EXPR_AST_HPP
#define ACTORTYPE_EXPR_AST_HPP

#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace actortype {

/// AST of the class-expression rule language.
///
/// Leaves carry fully resolved references: the attribute kind, the object
/// property that names it, the vocabulary the term lives in, and the
/// canonical term id (aliases are resolved at parse time).
struct ClassExpression {
    enum class Op {
        And,     // all children satisfied
        Or,      // any child satisfied
        Value,   // term asserted for the kind
        Some,    // kind has at least one asserted term
        AtLeast, // some asserted term ranks >= the bound (ordered vocabularies)
        AtMost   // kind nonempty and every asserted term ranks <= the bound
    };

    Op op = Op::Value;
    std::vector<ClassExpression> children; // And/Or only, always >= 2
    std::string kind;                      // attribute kind id (leaves)
    std::string property;                  // e.g. hasAccessAttribute (leaves)
    std::string vocabulary;                // vocabulary id (leaves)
    std::string term;                      // canonical term id (Value/AtLeast/AtMost)

    static ClassExpression and_of(std::vector<ClassExpression> children);
    static ClassExpression or_of(std::vector<ClassExpression> children);
    static ClassExpression value(std::string kind, std::string property, std::string vocabulary,
                                 std::string term);
    static ClassExpression some(std::string kind, std::string property, std::string vocabulary);
    static ClassExpression at_least(std::string kind, std::string property, std::string vocabulary,
                                    std::string term);
    static ClassExpression at_most(std::string kind, std::string property, std::string vocabulary,
                                   std::string term);

    bool is_leaf() const { return op != Op::And && op != Op::Or; }

    bool operator==(const ClassExpression& other) const;
    bool operator!=(const ClassExpression& other) const { return !(*this == other); }
};

/// One leaf reference found in an expression: (kind, term), or (kind, SOME)
/// for nonemptiness restrictions that name no term.
struct ExpressionTermRef {
    std::string kind;
    std::string term; // empty when some == true
    bool some = false;

    bool operator<(const ExpressionTermRef& other) const {
        return std::tie(kind, term, some) < std::tie(other.kind, other.term, other.some);
    }
    bool operator==(const ExpressionTermRef& other) const {
        return kind == other.kind && term == other.term && some == other.some;
    }
};

/// Deduplicated set of every leaf reference in the expression.
std::set<ExpressionTermRef> expression_terms(const ClassExpression& expr);

/// Canonical, fully parenthesized rendering. parse(print(e)) == e.
std::string print_expression(const ClassExpression& expr);

} // namespace actortype

#endif // ACTORTYPE_EXPR_AST_HPP
