#ifndef ACTORTYPE_REASONER_HPP
#define ACTORTYPE_REASONER_HPP

#include <json.hpp>
#include <string>
#include <vector>

#include "actortype/expr.hpp"
#include "actortype/kb.hpp"
#include "actortype/profile.hpp"
#include "actortype/timestamp.hpp"

namespace actortype {

enum class InferenceOrigin { Inferred, Asserted };

/// One type classification of an activity or actor, with everything needed
/// to explain it: the satisfaction trace (inferred only), the evidence the
/// attributes were derived from, and the validity interval.
struct TypeInference {
    std::string type_id;
    std::string subject; // activity id (inferred) or actor id (asserted)
    InferenceOrigin origin = InferenceOrigin::Inferred;
    Validity interval;
    std::vector<std::string> evidence;
    SatisfactionTrace trace; // root satisfied iff origin == Inferred

    bool operator==(const TypeInference& other) const {
        return type_id == other.type_id && subject == other.subject && origin == other.origin &&
               interval == other.interval && evidence == other.evidence && trace == other.trace;
    }
};

/// Everything one actor has been classified as, across all its activities.
/// No entry suppresses another: an actor may legitimately match types that
/// look contradictory across operations.
struct TypeTimeline {
    std::string actor_id;
    std::vector<TypeInference> entries; // sorted by interval start, then type id
};

/// A rule that almost fired: the root conjunction misses on at most K
/// top-level conjuncts.
struct NearMissReport {
    std::string type_id;
    std::size_t satisfied_count = 0;
    std::size_t total_count = 0;
    struct FailingConjunct {
        std::string expression;              // canonical text of the failing conjunct
        std::vector<std::string> observed;   // terms observed for the kinds it tests
    };
    std::vector<FailingConjunct> failing_conjuncts;
};

enum class LintSeverity { Warning, Info };

/// A valid-but-implausible characterization flagged for review.
struct LintFinding {
    std::string code; // L1, L2, L3
    LintSeverity severity = LintSeverity::Warning;
    std::string subject;
    std::string message;
    std::string rationale; // citation-style justification for the check
};

/// Evaluates every type rule of the profile against one activity.
/// Pure: independent of the KB and of any other activity. Inferences and
/// near-misses come back in lexicographic type-id order.
struct ActivityClassification {
    std::vector<TypeInference> inferences;
    std::vector<NearMissReport> near_misses;
};
ActivityClassification classify_activity(const Activity& activity, const Profile& profile,
                                         std::size_t near_miss_threshold = 1);

/// Union of per-activity inferences (each carrying its activity's interval)
/// plus the actor's asserted types over the unbounded interval.
TypeTimeline classify_actor(const std::string& actor_id, const KnowledgeBase& kb,
                            const Profile& profile);

/// Least fixed point of every registered predicate under its symmetric /
/// transitive flags, minus already-asserted triples and self-loops.
/// Deterministic order: (predicate, subject, object).
std::vector<RelationshipTriple> relationship_closure(const KnowledgeBase& kb);

/// Characterization consistency checks:
///   L1: an asserted nation-state-grade type sits next to observed resources
///       below organization level.
///   L2: attribute value counts exceed the registry cardinality annotations.
///   L3: an asserted type id is absent from the active profile.
/// Findings are ordered by (subject, code, message).
std::vector<LintFinding> lint(const KnowledgeBase& kb, const Profile& profile);

// Report serialization (stable key order, deterministic output).
nlohmann::json trace_to_json(const SatisfactionTrace& trace);
nlohmann::json validity_to_json(const Validity& interval);
nlohmann::json inference_to_json(const TypeInference& inference);
nlohmann::json near_miss_to_json(const NearMissReport& report);

/// ASCII rendering of a trace tree, one node per line: [x] satisfied,
/// [ ] unsatisfied, observed matches after "--".
std::string render_trace(const SatisfactionTrace& trace);

} // namespace actortype

#endif // ACTORTYPE_REASONER_HPP
