#ifndef ACTORTYPE_TESTS_ORACLE_HPP
#define ACTORTYPE_TESTS_ORACLE_HPP

// Test-only reference machinery, deliberately independent of the library's
// evaluation path: a slow DNF-expansion evaluator, a random expression
// generator, and exhaustive attribute-profile enumeration over small
// profiles.

#include <random>
#include <string>
#include <vector>

#include "actortype/expr.hpp"
#include "actortype/profile.hpp"

namespace oracle {

using actortype::AttributeProfile;
using actortype::ClassExpression;
using actortype::Profile;

// Three kinds over two 2-term vocabularies; small enough to enumerate every
// possible attribute profile (4^3 = 64).
inline Profile mini_profile() {
    return actortype::load_profile_text(R"({
      "profile_version": "oracle-mini",
      "vocabularies": [
        {"id": "colour", "ordered": false, "terms": [
          {"id": "red", "label": "Red", "definition": ""},
          {"id": "blue", "label": "Blue", "definition": ""}
        ]},
        {"id": "grade", "ordered": true, "terms": [
          {"id": "low", "label": "Low", "definition": ""},
          {"id": "high", "label": "High", "definition": ""}
        ]}
      ],
      "attributes": [
        {"kind": "hue", "property": "hasHueAttribute", "vocabulary": "colour",
         "cardinality": {"min": 0}},
        {"kind": "tone", "property": "hasToneAttribute", "vocabulary": "colour",
         "cardinality": {"min": 0}},
        {"kind": "tier", "property": "hasTierAttribute", "vocabulary": "grade",
         "cardinality": {"min": 0}}
      ],
      "types": []
    })");
}

// --- independent slow evaluator ---------------------------------------------

// Rank by scanning the declared order; no shared code with term_rank.
inline int slow_rank(const Profile& profile, const std::string& vocabulary,
                     const std::string& term) {
    const actortype::Vocabulary* vocab = profile.find_vocabulary(vocabulary);
    int rank = 0;
    for (const auto& t : vocab->terms) {
        if (t.id == term) return rank;
        ++rank;
    }
    return -1;
}

inline bool slow_leaf_holds(const ClassExpression& leaf, const AttributeProfile& attrs,
                            const Profile& profile) {
    auto it = attrs.entries.find(leaf.kind);
    const std::set<std::string> empty;
    const std::set<std::string>& observed = it == attrs.entries.end() ? empty : it->second;
    switch (leaf.op) {
        case ClassExpression::Op::Value:
            return observed.find(leaf.term) != observed.end();
        case ClassExpression::Op::Some:
            return !observed.empty();
        case ClassExpression::Op::AtLeast: {
            int bound = slow_rank(profile, leaf.vocabulary, leaf.term);
            for (const auto& t : observed)
                if (slow_rank(profile, leaf.vocabulary, t) >= bound) return true;
            return false;
        }
        case ClassExpression::Op::AtMost: {
            if (observed.empty()) return false;
            int bound = slow_rank(profile, leaf.vocabulary, leaf.term);
            for (const auto& t : observed)
                if (slow_rank(profile, leaf.vocabulary, t) > bound) return false;
            return true;
        }
        default:
            return false;
    }
}

using Disjunct = std::vector<const ClassExpression*>;

inline std::vector<Disjunct> to_dnf(const ClassExpression& expr) {
    if (expr.is_leaf()) return {{&expr}};
    if (expr.op == ClassExpression::Op::Or) {
        std::vector<Disjunct> result;
        for (const auto& child : expr.children) {
            auto sub = to_dnf(child);
            result.insert(result.end(), sub.begin(), sub.end());
        }
        return result;
    }
    // And: cartesian product of the children's disjuncts
    std::vector<Disjunct> result = {{}};
    for (const auto& child : expr.children) {
        auto sub = to_dnf(child);
        std::vector<Disjunct> next;
        for (const auto& left : result) {
            for (const auto& right : sub) {
                Disjunct combined = left;
                combined.insert(combined.end(), right.begin(), right.end());
                next.push_back(std::move(combined));
            }
        }
        result = std::move(next);
    }
    return result;
}

inline bool dnf_satisfied(const ClassExpression& expr, const AttributeProfile& attrs,
                          const Profile& profile) {
    for (const auto& disjunct : to_dnf(expr)) {
        bool all = true;
        for (const ClassExpression* leaf : disjunct)
            all = all && slow_leaf_holds(*leaf, attrs, profile);
        if (all) return true;
    }
    return false;
}

// --- generators --------------------------------------------------------------

inline ClassExpression random_leaf(std::mt19937& rng, const Profile& profile, bool allow_at_most) {
    const auto& attrs = profile.attributes;
    const actortype::AttributeKind& kind =
        attrs[std::uniform_int_distribution<size_t>(0, attrs.size() - 1)(rng)];
    const actortype::Vocabulary* vocab = profile.find_vocabulary(kind.vocabulary);
    const std::string& term =
        vocab->terms[std::uniform_int_distribution<size_t>(0, vocab->terms.size() - 1)(rng)].id;

    int max_pick = vocab->ordered ? (allow_at_most ? 3 : 2) : 1;
    switch (std::uniform_int_distribution<int>(0, max_pick)(rng)) {
        case 0:
            return ClassExpression::value(kind.kind, kind.property_name, kind.vocabulary, term);
        case 1:
            return ClassExpression::some(kind.kind, kind.property_name, kind.vocabulary);
        case 2:
            return ClassExpression::at_least(kind.kind, kind.property_name, kind.vocabulary, term);
        default:
            return ClassExpression::at_most(kind.kind, kind.property_name, kind.vocabulary, term);
    }
}

inline ClassExpression random_expression(std::mt19937& rng, const Profile& profile, int depth,
                                         bool allow_at_most = true) {
    if (depth <= 0 || std::uniform_int_distribution<int>(0, 3)(rng) == 0)
        return random_leaf(rng, profile, allow_at_most);
    std::vector<ClassExpression> children;
    int arity = std::uniform_int_distribution<int>(2, 3)(rng);
    for (int i = 0; i < arity; ++i)
        children.push_back(random_expression(rng, profile, depth - 1, allow_at_most));
    if (std::uniform_int_distribution<int>(0, 1)(rng) == 0)
        return ClassExpression::and_of(std::move(children));
    return ClassExpression::or_of(std::move(children));
}

// Every possible attribute profile over the given profile's kinds (each kind
// takes any subset of its vocabulary; empty subsets mean "absent").
inline std::vector<AttributeProfile> enumerate_attribute_profiles(const Profile& profile) {
    std::vector<AttributeProfile> result = {{}};
    for (const auto& kind : profile.attributes) {
        const actortype::Vocabulary* vocab = profile.find_vocabulary(kind.vocabulary);
        size_t n = vocab->terms.size();
        std::vector<AttributeProfile> next;
        for (size_t mask = 0; mask < (1u << n); ++mask) {
            std::set<std::string> terms;
            for (size_t bit = 0; bit < n; ++bit)
                if (mask & (1u << bit)) terms.insert(vocab->terms[bit].id);
            for (const auto& base : result) {
                AttributeProfile extended = base;
                if (!terms.empty()) extended.entries[kind.kind] = terms;
                next.push_back(std::move(extended));
            }
        }
        result = std::move(next);
    }
    return result;
}

// Random attribute profile plus a random pointwise subset of it.
inline std::pair<AttributeProfile, AttributeProfile> random_profile_pair(std::mt19937& rng,
                                                                         const Profile& profile) {
    AttributeProfile small, big;
    for (const auto& kind : profile.attributes) {
        const actortype::Vocabulary* vocab = profile.find_vocabulary(kind.vocabulary);
        std::set<std::string> superset, subset;
        for (const auto& term : vocab->terms) {
            if (std::uniform_int_distribution<int>(0, 2)(rng) == 0) {
                superset.insert(term.id);
                if (std::uniform_int_distribution<int>(0, 1)(rng) == 0) subset.insert(term.id);
            }
        }
        if (!superset.empty()) big.entries[kind.kind] = superset;
        if (!subset.empty()) small.entries[kind.kind] = subset;
    }
    return {small, big};
}

} // namespace oracle

#endif // ACTORTYPE_TESTS_ORACLE_HPP
