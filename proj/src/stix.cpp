#include "actortype/stix.hpp"

#include <algorithm>
#include <cctype>
#include <json.hpp>
#include <sstream>

#include "actortype/errors.hpp"

using nlohmann::json;

namespace actortype {

namespace detail {
extern const char* const kBuiltinMappingJson; // generated builtin_data.cpp
} // namespace detail

namespace {

std::string lower(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// Epoch placeholder for sources that carry no timestamps (MISP clusters);
// keeps imports deterministic for identical inputs.
const char* const kEpoch = "1970-01-01T00:00:00Z";

// FNV-1a with two offsets; enough bits to mint stable RFC 4122-shaped ids.
std::uint64_t fnv1a64_seeded(const std::string& data, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string deterministic_uuid(const std::string& seed) {
    std::uint64_t a = fnv1a64_seeded("hi:" + seed, 1469598103934665603ull);
    std::uint64_t b = fnv1a64_seeded("lo:" + seed, 1099511628211ull);
    unsigned char bytes[16];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(a >> (56 - 8 * i));
    for (int i = 0; i < 8; ++i) bytes[8 + i] = static_cast<unsigned char>(b >> (56 - 8 * i));
    bytes[6] = static_cast<unsigned char>((bytes[6] & 0x0f) | 0x50); // version 5 shape
    bytes[8] = static_cast<unsigned char>((bytes[8] & 0x3f) | 0x80); // RFC 4122 variant
    char buf[37];
    std::snprintf(buf, sizeof(buf),
                  "%02x%02x%02x%02x-%02x%02x-%02x%02x-%02x%02x-%02x%02x%02x%02x%02x%02x", bytes[0],
                  bytes[1], bytes[2], bytes[3], bytes[4], bytes[5], bytes[6], bytes[7], bytes[8],
                  bytes[9], bytes[10], bytes[11], bytes[12], bytes[13], bytes[14], bytes[15]);
    return buf;
}

} // namespace

// ---------------------------------------------------------------------------
// Mapping table

std::optional<std::set<std::pair<std::string, std::string>>> StixMapping::map_attribute(
    const std::string& field, const std::string& value) const {
    std::string needle = lower(value);
    for (const auto& rule : rules)
        if (rule.field == field && lower(rule.value) == needle) return rule.targets;
    return std::nullopt;
}

std::optional<std::string> StixMapping::map_actor_type(const std::string& value) const {
    std::string needle = lower(value);
    for (const auto& rule : actor_types)
        if (lower(rule.value) == needle) return rule.type_id;
    return std::nullopt;
}

std::optional<std::set<std::pair<std::string, std::string>>> map_value(const StixMapping& mapping,
                                                                        const std::string& field,
                                                                        const std::string& value) {
    return mapping.map_attribute(field, value);
}

StixMapping load_mapping_text(const std::string& json_text, const Profile& profile) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("mapping table is not well-formed JSON: ") + e.what(), 1, 1);
    }

    StixMapping mapping;
    try {
        for (const json& jr : doc.value("attributes", json::array())) {
            StixMapping::Rule rule;
            rule.field = jr.at("field").get<std::string>();
            rule.value = jr.at("value").get<std::string>();
            for (const json& jt : jr.at("targets")) {
                std::string kind = jt.at("kind").get<std::string>();
                std::string term = jt.at("term").get<std::string>();
                const AttributeKind* attr = profile.find_kind(kind);
                if (!attr)
                    throw ValidationError("mapping rule for " + rule.field + "=" + rule.value +
                                          " targets unknown kind \"" + kind + "\"");
                const Vocabulary* vocab = profile.find_vocabulary(attr->vocabulary);
                auto canonical = vocab->resolve(term);
                if (!canonical)
                    throw ValidationError("mapping rule for " + rule.field + "=" + rule.value +
                                          " targets unknown term \"" + attr->vocabulary + ":" +
                                          term + "\"");
                rule.targets.insert({kind, *canonical});
            }
            mapping.rules.push_back(std::move(rule));
        }
        for (const json& jr : doc.value("actor_types", json::array())) {
            StixMapping::ActorTypeRule rule;
            rule.value = jr.at("value").get<std::string>();
            rule.type_id = jr.at("type").get<std::string>();
            if (!profile.find_type(rule.type_id))
                throw ValidationError("actor type mapping \"" + rule.value +
                                      "\" targets unknown type rule \"" + rule.type_id + "\"");
            mapping.actor_types.push_back(std::move(rule));
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("mapping table is malformed: ") + e.what());
    }
    return mapping;
}

StixMapping load_mapping(std::istream& source, const Profile& profile) {
    std::ostringstream buffer;
    buffer << source.rdbuf();
    return load_mapping_text(buffer.str(), profile);
}

const StixMapping& builtin_mapping() {
    static const StixMapping mapping =
        load_mapping_text(detail::kBuiltinMappingJson, builtin_profile());
    return mapping;
}

// ---------------------------------------------------------------------------
// STIX bundle import

namespace {

const char* const kRequiredCommon[] = {"type", "spec_version", "id", "created", "modified"};

std::string safe_id(const json& obj) {
    if (obj.is_object() && obj.contains("id") && obj["id"].is_string())
        return obj["id"].get<std::string>();
    return "<no id>";
}

// Lint findings restricted to the records one import touched.
void scoped_lint(const KnowledgeBase& kb, const std::set<std::string>& subjects,
                 ImportReport& report) {
    for (const auto& finding : lint(kb, kb.profile()))
        if (subjects.count(finding.subject)) report.lint.push_back(finding);
}

void import_threat_actor(const json& obj, const StixMapping& mapping, KnowledgeBase& kb,
                         ImportReport& report, std::set<std::string>& touched) {
    std::string stix_id = obj.at("id").get<std::string>();
    ThreatActor actor;
    actor.id = stix_id;
    actor.canonical_name = obj.value("name", stix_id);
    actor.description = obj.value("description", "");
    actor.created = Timestamp::parse(obj.at("created").get<std::string>());
    actor.modified = Timestamp::parse(obj.at("modified").get<std::string>());
    actor.source_object = obj.dump();

    for (const json& jt : obj.value("threat_actor_types", json::array())) {
        std::string value = jt.get<std::string>();
        auto type_id = mapping.map_actor_type(value);
        if (type_id)
            actor.asserted_types.insert({*type_id, "stix:threat_actor_types \"" + value + "\""});
        else
            report.unmapped.push_back({"threat_actor_types", value, stix_id});
    }

    std::string actor_id = upsert_actor(kb, std::move(actor));
    ++report.actors_imported;
    touched.insert(actor_id);

    const ThreatActor* stored = kb.find_actor(actor_id);
    for (const json& ja : obj.value("aliases", json::array())) {
        std::string alias = ja.get<std::string>();
        if (alias == stored->canonical_name) continue;
        RelationshipTriple triple;
        triple.subject = stored->canonical_name;
        triple.predicate = "known-as";
        triple.object = alias;
        triple.source = "stix:" + stix_id + " aliases";
        assert_triple(kb, std::move(triple));
        ++report.triples_created;
    }

    // Characterization fields -> one synthetic activity via the mapping.
    AttributeProfile attrs;
    auto apply = [&](const std::string& field, const std::string& value) {
        auto targets = mapping.map_attribute(field, value);
        if (!targets) {
            report.unmapped.push_back({field, value, stix_id});
            return;
        }
        for (const auto& [kind, term] : *targets) attrs.entries[kind].insert(term);
    };
    if (obj.contains("primary_motivation"))
        apply("primary_motivation", obj["primary_motivation"].get<std::string>());
    for (const json& jm : obj.value("secondary_motivations", json::array()))
        apply("secondary_motivations", jm.get<std::string>());
    if (obj.contains("resource_level")) apply("resource_level", obj["resource_level"].get<std::string>());
    if (obj.contains("sophistication")) apply("sophistication", obj["sophistication"].get<std::string>());

    if (!attrs.entries.empty()) {
        Activity activity;
        activity.id = actor_id + ":characterization";
        activity.actor_id = actor_id;
        activity.name = stored->canonical_name + " (imported characterization)";
        activity.interval.start = obj.contains("first_seen")
                                      ? Timestamp::parse(obj["first_seen"].get<std::string>())
                                      : stored->created;
        if (obj.contains("last_seen"))
            activity.interval.end = Timestamp::parse(obj["last_seen"].get<std::string>());
        activity.attrs = std::move(attrs);
        activity.evidence.push_back("imported from STIX threat-actor " + stix_id);
        if (obj.contains("confidence") && obj["confidence"].is_number_integer())
            activity.confidence = obj["confidence"].get<int>();
        std::vector<StoreDiagnostic> diagnostics;
        add_activity(kb, std::move(activity), &diagnostics);
        ++report.activities_created;
        touched.insert(actor_id + ":characterization");
    }
}

} // namespace

ImportReport import_stix_bundle(std::istream& source, const StixMapping& mapping,
                                KnowledgeBase& kb) {
    std::ostringstream buffer;
    buffer << source.rdbuf();
    json bundle;
    try {
        bundle = json::parse(buffer.str());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("bundle is not well-formed JSON: ") + e.what(), 1, 1);
    }
    if (!bundle.is_object() || !bundle.contains("type") || !bundle["type"].is_string() ||
        bundle["type"] != "bundle" || !bundle.contains("objects") || !bundle["objects"].is_array())
        throw ValidationError(
            "input is not a STIX bundle (expected type \"bundle\" with an objects array)");

    ImportReport report;
    std::set<std::string> touched;

    for (const json& obj : bundle["objects"]) {
        if (!obj.is_object() || !obj.contains("type") || !obj["type"].is_string()) {
            report.errors.push_back("object without a type field skipped");
            continue;
        }
        std::string type = obj["type"].get<std::string>();
        ++report.object_counts[type];

        std::vector<std::string> missing;
        for (const char* field : kRequiredCommon)
            if (!obj.contains(field)) missing.push_back(field);
        if (!missing.empty()) {
            std::string fields;
            for (const auto& f : missing) fields += (fields.empty() ? "" : ", ") + f;
            report.errors.push_back("object " + safe_id(obj) +
                                    " is missing required fields: " + fields);
            add_passthrough_object(kb, obj.dump()); // keep it anyway; nothing is dropped
            ++report.passthrough_objects;
            continue;
        }

        try {
            if (type == "threat-actor") {
                import_threat_actor(obj, mapping, kb, report, touched);
            } else if (type == "relationship") {
                std::string predicate = obj.value("relationship_type", "");
                add_passthrough_object(kb, obj.dump()); // original preserved either way
                ++report.passthrough_objects;
                if (kb.predicates().registered(predicate)) {
                    RelationshipTriple triple;
                    triple.subject = obj.at("source_ref").get<std::string>();
                    triple.predicate = predicate;
                    triple.object = obj.at("target_ref").get<std::string>();
                    triple.source = "stix:" + obj.at("id").get<std::string>();
                    assert_triple(kb, std::move(triple));
                    ++report.triples_created;
                } else {
                    report.notes.push_back("relationship " + obj.at("id").get<std::string>() +
                                           " uses unregistered predicate \"" + predicate +
                                           "\"; kept as passthrough only");
                }
            } else {
                add_passthrough_object(kb, obj.dump());
                ++report.passthrough_objects;
            }
        } catch (const Error& e) {
            report.errors.push_back("object " + safe_id(obj) + ": " + e.what());
        } catch (const json::exception& e) {
            report.errors.push_back("object " + safe_id(obj) + " is malformed: " + e.what());
        }
    }

    scoped_lint(kb, touched, report);
    return report;
}

// ---------------------------------------------------------------------------
// MISP galaxy cluster import

namespace {

void import_misp_entry(const json& entry, const std::string& name, KnowledgeBase& kb,
                       ImportReport& report, std::set<std::string>& touched) {
    const StixMapping& mapping = builtin_mapping();
    Timestamp epoch = Timestamp::parse(kEpoch);

    ThreatActor actor;
    if (entry.contains("uuid")) actor.id = entry["uuid"].get<std::string>();
    actor.canonical_name = name;
    actor.description = entry.value("description", "");
    actor.created = epoch;
    actor.modified = epoch;
    actor.source_object = entry.dump();
    std::string actor_id = upsert_actor(kb, std::move(actor));
    ++report.actors_imported;
    touched.insert(actor_id);

    const json meta = entry.value("meta", json::object());
    for (const json& js : meta.value("synonyms", json::array())) {
        std::string synonym = js.get<std::string>();
        if (synonym == name) continue;
        RelationshipTriple triple;
        triple.subject = name;
        triple.predicate = "known-as";
        triple.object = synonym;
        triple.source = "misp:" + name + " synonyms";
        assert_triple(kb, std::move(triple));
        ++report.triples_created;
    }

    AttributeProfile attrs;
    if (meta.contains("motive") && meta["motive"].is_string()) {
        std::string motive = meta["motive"].get<std::string>();
        auto targets = mapping.map_attribute("motive", motive);
        if (targets)
            for (const auto& [kind, term] : *targets) attrs.entries[kind].insert(term);
        else
            report.unmapped.push_back({"motive", motive, name});
    }
    std::optional<int> confidence;
    if (meta.contains("attribution-confidence")) {
        const json& jc = meta["attribution-confidence"];
        try {
            int value = jc.is_string() ? std::stoi(jc.get<std::string>()) : jc.get<int>();
            if (value >= 0 && value <= 100)
                confidence = value;
            else
                report.notes.push_back("attribution-confidence out of range for " + name);
        } catch (const std::exception&) {
            report.notes.push_back("unreadable attribution-confidence for " + name);
        }
    }

    if (!attrs.entries.empty() || confidence) {
        std::string activity_id = actor_id + ":characterization";
        Activity activity;
        activity.id = activity_id;
        activity.actor_id = actor_id;
        activity.name = name + " (imported characterization)";
        activity.interval.start = epoch;
        activity.attrs = std::move(attrs);
        activity.evidence.push_back("imported from MISP cluster value \"" + name + "\"");
        activity.confidence = confidence;
        add_activity(kb, std::move(activity));
        ++report.activities_created;
        touched.insert(activity_id);
    }
}

} // namespace

ImportReport import_misp_cluster(std::istream& source, KnowledgeBase& kb) {
    std::ostringstream buffer;
    buffer << source.rdbuf();
    json doc;
    try {
        doc = json::parse(buffer.str());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("cluster is not well-formed JSON: ") + e.what(), 1, 1);
    }
    // Accept either the bare values array or a whole galaxy cluster document.
    json values;
    if (doc.is_array())
        values = doc;
    else if (doc.is_object() && doc.contains("values"))
        values = doc["values"];
    else
        throw ValidationError("input is not a galaxy cluster (expected an array of value objects)");

    ImportReport report;
    std::set<std::string> touched;

    for (const json& entry : values) {
        if (!entry.is_object() || !entry.contains("value") || !entry["value"].is_string()) {
            report.notes.push_back("cluster entry without a value skipped");
            continue;
        }
        ++report.object_counts["misp-value"];
        std::string name = entry["value"].get<std::string>();
        try {
            import_misp_entry(entry, name, kb, report, touched);
        } catch (const Error& e) {
            report.errors.push_back("entry \"" + name + "\": " + e.what());
        } catch (const json::exception& e) {
            report.errors.push_back("entry \"" + name + "\" is malformed: " + e.what());
        }
    }

    scoped_lint(kb, touched, report);
    return report;
}

// ---------------------------------------------------------------------------
// STIX bundle export

std::string export_stix_bundle(const KnowledgeBase& kb,
                               const std::vector<TypeInference>& inferences,
                               const std::vector<std::string>& actor_ids) {
    json objects = json::array();
    json notes = json::array();

    for (const auto& actor_id : actor_ids) {
        const ThreatActor* actor = kb.find_actor(actor_id);
        if (!actor) throw ValidationError("unknown actor \"" + actor_id + "\"");

        json sdo;
        json source = actor->source_object.empty() ? json() : json::parse(actor->source_object);
        if (source.is_object() && source.contains("type") && source["type"].is_string() &&
            source["type"] == "threat-actor") {
            sdo = std::move(source);
        } else {
            sdo["type"] = "threat-actor";
            sdo["spec_version"] = "2.1";
            sdo["id"] = "threat-actor--" + deterministic_uuid("actor:" + actor_id);
            sdo["created"] = actor->created.text();
            sdo["modified"] = actor->modified.text();
            sdo["name"] = actor->canonical_name;
            if (!actor->description.empty()) sdo["description"] = actor->description;
        }
        std::string sdo_id = sdo["id"].get<std::string>();

        // Gather the inferences that belong to this actor or its activities.
        std::set<std::string> subjects = {actor_id};
        for (const Activity* activity : kb.activities_of(actor_id)) subjects.insert(activity->id);
        std::vector<const TypeInference*> own;
        for (const auto& inference : inferences)
            if (subjects.count(inference.subject)) own.push_back(&inference);
        std::sort(own.begin(), own.end(), [](const TypeInference* a, const TypeInference* b) {
            if (a->interval.before(b->interval)) return true;
            if (b->interval.before(a->interval)) return false;
            return a->type_id < b->type_id;
        });

        if (!own.empty()) {
            json entries = json::array();
            for (const TypeInference* inference : own) {
                json entry;
                entry["type_id"] = inference->type_id;
                entry["interval"] = validity_to_json(inference->interval);
                entry["evidence"] = inference->evidence;
                entry["origin"] =
                    inference->origin == InferenceOrigin::Inferred ? "inferred" : "asserted";
                entries.push_back(std::move(entry));
            }
            sdo["x_inferred_actor_types"] = std::move(entries);
        }

        for (const TypeInference* inference : own) {
            if (inference->origin != InferenceOrigin::Inferred) continue;
            json note;
            note["type"] = "note";
            note["spec_version"] = "2.1";
            note["id"] = "note--" + deterministic_uuid("trace:" + actor_id + ":" +
                                                       inference->subject + ":" +
                                                       inference->type_id);
            note["created"] = actor->modified.text();
            note["modified"] = actor->modified.text();
            note["abstract"] = "Type inference: " + inference->type_id;
            note["content"] = "Satisfaction trace for " + inference->type_id + " on " +
                              inference->subject + "\n" + render_trace(inference->trace);
            note["object_refs"] = json::array({sdo_id});
            notes.push_back(std::move(note));
        }

        objects.push_back(std::move(sdo));
    }

    for (const json& note : notes) objects.push_back(note);
    for (const auto& text : kb.passthrough_objects()) objects.push_back(json::parse(text));

    std::string seed;
    for (const json& obj : objects) seed += obj.value("id", "") + ";";
    json bundle;
    bundle["type"] = "bundle";
    bundle["id"] = "bundle--" + deterministic_uuid("bundle:" + seed);
    bundle["objects"] = std::move(objects);
    return bundle.dump(2) + "\n";
}

} // namespace actortype
