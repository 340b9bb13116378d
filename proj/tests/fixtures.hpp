#ifndef ACTORTYPE_TESTS_FIXTURES_HPP
#define ACTORTYPE_TESTS_FIXTURES_HPP

#include <fstream>
#include <random>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "actortype/kb.hpp"
#include "actortype/profile.hpp"

namespace fixtures {

// The nation-state rule text, as shipped in the builtin profile.
inline const char* government_cyberwarrior_expr() {
    return R"(((hasVisibilityAttribute some Visibility) or
(hasVisibilityAttribute value visibility:dontCare))
and ((hasObjectiveAttribute value objective:damage) or
(hasObjectiveAttribute value objective:deny) or
(hasObjectiveAttribute value objective:destroy))
and ((hasOutcomeAttribute value outcome:damage) or
(hasOutcomeAttribute value outcome:embarrassment))
and (hasAccessAttribute value access:external)
and (hasDefiningMotivationAttribute value motivation:dominance)
and (hasLimitsAttribute value limits:extraLegalMajor)
and (hasResourcesAttribute value resources:government)
and (hasSkillsAttribute value skills:adept))";
}

inline std::map<std::string, std::set<std::string>> darkseoul_raw_attrs() {
    return {
        {"access", {"external"}},
        {"visibility", {"covert"}},
        {"objective", {"destroy", "damage", "copy"}},
        {"limits", {"extraLegalMajor"}},
        {"outcome", {"damage"}},
        {"definingMotivation", {"dominance"}},
        {"skills", {"adept"}},
        {"resources", {"government"}},
    };
}

// Same operation read incident-by-incident: capability attributes drop to
// the low end of each scale.
inline std::map<std::string, std::set<std::string>> darkseoul_single_incident_raw_attrs() {
    auto attrs = darkseoul_raw_attrs();
    attrs["skills"] = {"minimal"};
    attrs["resources"] = {"club"};
    attrs["limits"] = {"extraLegalMinor"};
    return attrs;
}

inline std::map<std::string, std::set<std::string>> sony_raw_attrs() {
    return {
        {"access", {"external"}},
        {"visibility", {"covert"}},
        {"objective", {"copy", "damage", "destroy"}},
        {"limits", {"extraLegalMajor"}},
        {"outcome", {"damage", "embarrassment"}},
        {"definingMotivation", {"dominance"}},
        {"skills", {"adept"}},
        {"resources", {"organization"}},
    };
}

inline std::map<std::string, std::set<std::string>> june2013_raw_attrs() {
    return {
        {"access", {"external"}},
        {"visibility", {"overt"}},
        {"objective", {"damage", "deny"}},
        {"limits", {"extraLegalMinor"}},
        {"outcome", {"damage", "embarrassment"}},
        {"definingMotivation", {"dominance"}},
        {"skills", {"minimal"}},
        {"resources", {"club"}},
    };
}

inline std::map<std::string, std::set<std::string>> bank_heist_raw_attrs() {
    return {
        {"access", {"external"}},
        {"visibility", {"covert"}},
        {"objective", {"take", "copy"}},
        {"limits", {"extraLegalMajor"}},
        {"outcome", {"acquisitionTheft"}},
        {"definingMotivation", {"financialGain"}},
        {"skills", {"adept"}},
        {"resources", {"organization"}},
    };
}

inline actortype::Activity make_activity(const actortype::Profile& profile, std::string id,
                                         std::string actor_id, std::string name,
                                         std::string start, std::string end,
                                         std::map<std::string, std::set<std::string>> raw,
                                         std::vector<std::string> evidence) {
    actortype::Activity activity;
    activity.id = std::move(id);
    activity.actor_id = std::move(actor_id);
    activity.name = std::move(name);
    activity.interval.start = actortype::Timestamp::parse(start);
    if (!end.empty()) activity.interval.end = actortype::Timestamp::parse(end);
    activity.attrs = actortype::make_attribute_profile(profile, raw);
    activity.evidence = std::move(evidence);
    return activity;
}

inline std::shared_ptr<const actortype::Profile> extension_profile() {
    static std::shared_ptr<const actortype::Profile> profile = [] {
        std::ifstream in(ACTORTYPE_SOURCE_DIR "/profiles/tal-nationalistic-hacktivist.json");
        return std::make_shared<const actortype::Profile>(actortype::load_profile(in));
    }();
    return profile;
}

// The four-operation polymorphic actor fixture. Activity insertion order is
// parameterizable so determinism tests can permute it.
inline actortype::KnowledgeBase lazarus_kb(std::shared_ptr<const actortype::Profile> profile,
                                           std::vector<int> order = {0, 1, 2, 3}) {
    using namespace actortype;
    KnowledgeBase kb(profile);

    ThreatActor lazarus;
    lazarus.id = "lazarus";
    lazarus.canonical_name = "Lazarus Group";
    lazarus.description = "Threat group attributed to the North Korean government.";
    lazarus.asserted_types.insert({"governmentCyberwarrior", "Novetta Operation Blockbuster"});
    lazarus.created = Timestamp::parse("2016-02-24T00:00:00Z");
    lazarus.modified = Timestamp::parse("2021-03-10T00:00:00Z");
    upsert_actor(kb, lazarus);

    const Profile& p = kb.profile();
    std::vector<Activity> activities = {
        make_activity(p, "darkseoul2013", "lazarus", "DarkSeoul wiper attack", "2013-03-20",
                      "2013-03-20", darkseoul_raw_attrs(),
                      {"McAfee, Dissecting Operation Troy (2013)"}),
        make_activity(p, "june2013-defacements", "lazarus", "Korean War anniversary defacements",
                      "2013-06-25", "2013-06-25", june2013_raw_attrs(),
                      {"Symantec, Four Years of DarkSeoul Cyberattacks (2013)"}),
        make_activity(p, "sony2014", "lazarus", "Sony Pictures Entertainment intrusion",
                      "2014-11-24", "", sony_raw_attrs(),
                      {"US DoJ criminal complaint (2018)", "Novetta Operation Blockbuster (2016)"}),
        make_activity(p, "bankheist2016", "lazarus", "Bangladesh Bank SWIFT heist", "2016-02-04",
                      "2016-02-05", bank_heist_raw_attrs(),
                      {"Kaspersky, Lazarus Under The Hood (2017)"}),
    };
    for (int index : order) add_activity(kb, activities[static_cast<size_t>(index)]);

    assert_triple(kb, {"Lazarus Group", "known-as", "HIDDEN COBRA", false, "US-CERT"});
    assert_triple(kb, {"Lazarus Group", "known-as", "Guardians of Peace", false,
                       "Novetta Operation Blockbuster"});
    return kb;
}

// Small random KB over the builtin profile; exercises actors, activities,
// attribute sets, confidence, triples, and passthrough payloads.
inline actortype::KnowledgeBase random_kb(std::mt19937& rng) {
    using namespace actortype;
    KnowledgeBase kb;
    const Profile& p = kb.profile();
    auto pick = [&rng](int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(rng);
    };

    int actor_count = pick(1, 4);
    std::vector<std::string> actor_ids;
    for (int a = 0; a < actor_count; ++a) {
        ThreatActor actor;
        actor.id = "actor" + std::to_string(a);
        actor.canonical_name = "Actor " + std::to_string(a);
        actor.description = pick(0, 1) ? "opaque description " + std::to_string(pick(0, 99)) : "";
        if (pick(0, 2) == 0) actor.asserted_types.insert({"governmentCyberwarrior", "analyst"});
        if (pick(0, 3) == 0) actor.asserted_types.insert({"nationState", "legacy feed"});
        actor.created = Timestamp::parse("2019-01-0" + std::to_string(pick(1, 9)) + "T08:30:00Z");
        actor.modified = Timestamp::parse("2020-06-15T1" + std::to_string(pick(0, 9)) + ":00:00Z");
        upsert_actor(kb, actor);
        actor_ids.push_back(actor.id);
    }

    int activity_count = pick(0, 5);
    for (int v = 0; v < activity_count; ++v) {
        Activity activity;
        activity.id = "op" + std::to_string(v);
        activity.actor_id = actor_ids[static_cast<size_t>(pick(0, actor_count - 1))];
        activity.name = "operation " + std::to_string(v);
        int day = pick(1, 27);
        activity.interval.start =
            Timestamp::parse("2021-03-" + std::string(day < 10 ? "0" : "") + std::to_string(day));
        if (pick(0, 1)) activity.interval.end = Timestamp::parse("2021-12-31");
        for (const auto& kind : p.attributes) {
            if (pick(0, 2) != 0) continue;
            const Vocabulary* vocab = p.find_vocabulary(kind.vocabulary);
            std::set<std::string> terms;
            int n = pick(1, 2);
            for (int t = 0; t < n; ++t)
                terms.insert(
                    vocab->terms[static_cast<size_t>(pick(0, static_cast<int>(vocab->terms.size()) - 1))]
                        .id);
            activity.attrs.entries[kind.kind] = terms;
        }
        if (pick(0, 1)) activity.evidence.push_back("report " + std::to_string(pick(1, 50)));
        if (pick(0, 2) == 0) activity.confidence = pick(0, 100);
        add_activity(kb, activity);
    }

    const char* names[] = {"Alpha", "Beta", "Gamma", "Delta"};
    int triple_count = pick(0, 4);
    for (int t = 0; t < triple_count; ++t) {
        std::string s = names[pick(0, 3)];
        std::string o = names[pick(0, 3)];
        if (s == o) continue;
        assert_triple(kb, {s, "known-as", o, false, "feed"});
    }

    if (pick(0, 1)) {
        add_passthrough_object(kb, R"({"type":"identity","spec_version":"2.1",)"
                                   R"("id":"identity--00000000-0000-4000-8000-0000000000)" +
                                       std::to_string(pick(10, 99)) + R"(",)"
                                   R"("created":"2020-01-01T00:00:00Z",)"
                                   R"("modified":"2020-01-01T00:00:00Z","name":"vendor"})");
    }
    return kb;
}

} // namespace fixtures

#endif // ACTORTYPE_TESTS_FIXTURES_HPP
