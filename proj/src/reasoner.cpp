#include "actortype/reasoner.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "actortype/errors.hpp"

namespace actortype {

namespace {

std::vector<std::string> observed_for_conjunct(const ClassExpression& conjunct,
                                               const AttributeProfile& attrs,
                                               const Profile& profile) {
    std::set<std::string> kinds;
    for (const auto& ref : expression_terms(conjunct)) kinds.insert(ref.kind);
    std::set<std::string> observed;
    for (const auto& kind : kinds) {
        const AttributeKind* attr = profile.find_kind(kind);
        for (const auto& term : attrs.terms_for(kind))
            observed.insert((attr ? attr->vocabulary : kind) + ":" + term);
    }
    return {observed.begin(), observed.end()};
}

} // namespace

ActivityClassification classify_activity(const Activity& activity, const Profile& profile,
                                         std::size_t near_miss_threshold) {
    ActivityClassification result;
    for (const auto& rule : profile.types) { // profile order is id-unique; sort below
        SatisfactionTrace trace = evaluate(rule.expression, activity.attrs, profile);
        if (trace.satisfied) {
            TypeInference inference;
            inference.type_id = rule.id;
            inference.subject = activity.id;
            inference.origin = InferenceOrigin::Inferred;
            inference.interval = Validity::of(activity.interval);
            inference.evidence = activity.evidence;
            inference.trace = std::move(trace);
            result.inferences.push_back(std::move(inference));
            continue;
        }
        if (rule.expression.op != ClassExpression::Op::And) continue;
        std::size_t total = rule.expression.children.size();
        std::vector<std::size_t> failing;
        for (std::size_t i = 0; i < total; ++i)
            if (!trace.children[i].satisfied) failing.push_back(i);
        if (failing.empty() || failing.size() > near_miss_threshold) continue;

        NearMissReport report;
        report.type_id = rule.id;
        report.total_count = total;
        report.satisfied_count = total - failing.size();
        for (std::size_t i : failing) {
            NearMissReport::FailingConjunct fc;
            fc.expression = trace.children[i].expression;
            fc.observed = observed_for_conjunct(rule.expression.children[i], activity.attrs, profile);
            report.failing_conjuncts.push_back(std::move(fc));
        }
        result.near_misses.push_back(std::move(report));
    }
    std::sort(result.inferences.begin(), result.inferences.end(),
              [](const TypeInference& a, const TypeInference& b) { return a.type_id < b.type_id; });
    std::sort(result.near_misses.begin(), result.near_misses.end(),
              [](const NearMissReport& a, const NearMissReport& b) { return a.type_id < b.type_id; });
    return result;
}

TypeTimeline classify_actor(const std::string& actor_id, const KnowledgeBase& kb,
                            const Profile& profile) {
    const ThreatActor* actor = kb.find_actor(actor_id);
    if (!actor) throw ValidationError("unknown actor \"" + actor_id + "\"");

    TypeTimeline timeline;
    timeline.actor_id = actor_id;
    for (const Activity* activity : kb.activities_of(actor_id)) {
        auto classification = classify_activity(*activity, profile);
        for (auto& inference : classification.inferences)
            timeline.entries.push_back(std::move(inference));
    }
    for (const auto& assertion : actor->asserted_types) {
        TypeInference entry;
        entry.type_id = assertion.type_id;
        entry.subject = actor_id;
        entry.origin = InferenceOrigin::Asserted;
        entry.interval = Validity::unbounded();
        if (!assertion.source.empty()) entry.evidence.push_back(assertion.source);
        timeline.entries.push_back(std::move(entry));
    }

    std::sort(timeline.entries.begin(), timeline.entries.end(),
              [](const TypeInference& a, const TypeInference& b) {
                  if (a.interval.before(b.interval)) return true;
                  if (b.interval.before(a.interval)) return false;
                  if (a.type_id != b.type_id) return a.type_id < b.type_id;
                  if (a.origin != b.origin) return a.origin == InferenceOrigin::Inferred;
                  return a.subject < b.subject;
              });
    // Dedup by (type_id, interval, origin).
    timeline.entries.erase(
        std::unique(timeline.entries.begin(), timeline.entries.end(),
                    [](const TypeInference& a, const TypeInference& b) {
                        return a.type_id == b.type_id && a.interval == b.interval &&
                               a.origin == b.origin;
                    }),
        timeline.entries.end());
    return timeline;
}

// ---------------------------------------------------------------------------
// Relationship closure

std::vector<RelationshipTriple> relationship_closure(const KnowledgeBase& kb) {
    std::map<std::string, std::set<std::pair<std::string, std::string>>> asserted;
    for (const auto& triple : kb.triples())
        if (!triple.inferred) asserted[triple.predicate].insert({triple.subject, triple.object});

    std::vector<RelationshipTriple> inferred;
    for (const auto& [predicate, pairs] : asserted) {
        auto traits_it = kb.predicates().entries.find(predicate);
        if (traits_it == kb.predicates().entries.end()) continue;
        const PredicateTraits& traits = traits_it->second;

        std::set<std::pair<std::string, std::string>> closure = pairs;
        bool grew = true;
        while (grew) {
            grew = false;
            std::set<std::pair<std::string, std::string>> additions;
            if (traits.symmetric)
                for (const auto& [s, o] : closure)
                    if (!closure.count({o, s})) additions.insert({o, s});
            if (traits.transitive)
                for (const auto& [s, o] : closure)
                    for (const auto& [s2, o2] : closure)
                        if (o == s2 && !closure.count({s, o2})) additions.insert({s, o2});
            if (!additions.empty()) {
                closure.insert(additions.begin(), additions.end());
                grew = true;
            }
        }

        for (const auto& [s, o] : closure) {
            if (s == o) continue; // no self-loops
            if (pairs.count({s, o})) continue;
            RelationshipTriple triple;
            triple.subject = s;
            triple.predicate = predicate;
            triple.object = o;
            triple.inferred = true;
            triple.source = "closure over " + predicate;
            inferred.push_back(std::move(triple));
        }
    }
    std::sort(inferred.begin(), inferred.end());
    return inferred;
}

// ---------------------------------------------------------------------------
// Lint

namespace {

// The nation-state type demands state-grade backing; used by L1.
bool implies_state_resources(const std::string& type_id) {
    return type_id == "governmentCyberwarrior";
}

} // namespace

std::vector<LintFinding> lint(const KnowledgeBase& kb, const Profile& profile) {
    std::vector<LintFinding> findings;

    const Vocabulary* resources = profile.find_vocabulary("resources");
    std::size_t org_rank = 0;
    bool rank_ok = false;
    if (resources && resources->ordered && resources->resolve("organization")) {
        org_rank = term_rank(profile, "resources", "organization");
        rank_ok = true;
    }

    for (const auto& [actor_id, actor] : kb.actors()) {
        std::string state_grade_type;
        for (const auto& assertion : actor.asserted_types) {
            // L3: asserted type unknown to the active profile.
            if (!profile.find_type(assertion.type_id)) {
                findings.push_back({"L3", LintSeverity::Warning, actor_id,
                                    "asserted type \"" + assertion.type_id +
                                        "\" is not defined by profile \"" +
                                        profile.profile_version + "\"",
                                    "asserted classifications are only checked against the active "
                                    "profile, never rejected"});
            }
            if (implies_state_resources(assertion.type_id)) state_grade_type = assertion.type_id;
        }

        // L1: state-grade type asserted while every observed resources value
        // sits below organization level. A single lean operation is normal
        // polymorphism; never reaching organization level is not. One per actor.
        if (!rank_ok || state_grade_type.empty()) continue;
        std::vector<std::string> observed;
        std::size_t best = 0;
        for (const Activity* activity : kb.activities_of(actor_id))
            for (const auto& term : activity->attrs.terms_for("resources")) {
                best = std::max(best, term_rank(profile, "resources", term));
                observed.push_back(activity->id + ": resources:" + term);
            }
        if (!observed.empty() && best < org_rank) {
            std::string detail;
            for (const auto& item : observed) detail += (detail.empty() ? "" : "; ") + item;
            findings.push_back({"L1", LintSeverity::Warning, actor_id,
                                "type \"" + state_grade_type +
                                    "\" is asserted but observed resources never reach "
                                    "organization level (" +
                                    detail + ")",
                                "a state-backed classification with low observed resources is "
                                "unlikely to be correct"});
        }
    }

    // L2: cardinality annotations exceeded.
    for (const auto& [activity_id, activity] : kb.activities()) {
        for (const auto& diag : cardinality_findings(profile, activity_id, activity.attrs))
            findings.push_back({"L2", LintSeverity::Warning, activity_id, diag.message,
                                "value counts come from the library's attribute annotations"});
    }

    std::sort(findings.begin(), findings.end(), [](const LintFinding& a, const LintFinding& b) {
        return std::tie(a.subject, a.code, a.message) < std::tie(b.subject, b.code, b.message);
    });
    return findings;
}

// ---------------------------------------------------------------------------
// Report serialization

using nlohmann::json;

json trace_to_json(const SatisfactionTrace& trace) {
    json j;
    j["expression"] = trace.expression;
    j["satisfied"] = trace.satisfied;
    if (!trace.matched_terms.empty()) j["matched_terms"] = trace.matched_terms;
    if (!trace.children.empty()) {
        json children = json::array();
        for (const auto& child : trace.children) children.push_back(trace_to_json(child));
        j["children"] = std::move(children);
    }
    return j;
}

json validity_to_json(const Validity& interval) {
    json j = json::object();
    if (interval.start) j["start"] = interval.start->text();
    if (interval.end) j["end"] = interval.end->text();
    return j;
}

json inference_to_json(const TypeInference& inference) {
    json j;
    j["type_id"] = inference.type_id;
    j["subject"] = inference.subject;
    j["origin"] = inference.origin == InferenceOrigin::Inferred ? "inferred" : "asserted";
    j["interval"] = validity_to_json(inference.interval);
    j["evidence"] = inference.evidence;
    if (inference.origin == InferenceOrigin::Inferred) j["trace"] = trace_to_json(inference.trace);
    return j;
}

json near_miss_to_json(const NearMissReport& report) {
    json j;
    j["type_id"] = report.type_id;
    j["satisfied_count"] = report.satisfied_count;
    j["total_count"] = report.total_count;
    json failing = json::array();
    for (const auto& fc : report.failing_conjuncts)
        failing.push_back({{"expression", fc.expression}, {"observed", fc.observed}});
    j["failing_conjuncts"] = std::move(failing);
    return j;
}

namespace {
void render_trace_node(const SatisfactionTrace& trace, int depth, std::string& out) {
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
    out += trace.satisfied ? "[x] " : "[ ] ";
    out += trace.expression;
    if (!trace.matched_terms.empty()) {
        out += "  -- ";
        for (std::size_t i = 0; i < trace.matched_terms.size(); ++i) {
            if (i) out += ", ";
            out += trace.matched_terms[i];
        }
    }
    out += "\n";
    for (const auto& child : trace.children) render_trace_node(child, depth + 1, out);
}
} // namespace

std::string render_trace(const SatisfactionTrace& trace) {
    std::string out;
    render_trace_node(trace, 0, out);
    return out;
}

} // namespace actortype
