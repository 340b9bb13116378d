#include "actortype/kb.hpp"

#include <algorithm>
#include <cctype>
#include <json.hpp>
#include <sstream>

#include "actortype/errors.hpp"

using nlohmann::json;

namespace actortype {

namespace {

std::shared_ptr<const Profile> builtin_profile_ptr() {
    // Non-owning: the builtin profile lives for the whole process.
    return std::shared_ptr<const Profile>(&builtin_profile(), [](const Profile*) {});
}

// FNV-1a 64-bit over the canonical serialization; cheap tamper/truncation check.
std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string checksum_hex(const std::string& data) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(data)));
    return std::string("fnv1a64:") + buf;
}

bool valid_record_id(const std::string& id) {
    if (id.empty()) return false;
    for (char c : id) {
        if (std::isalnum(static_cast<unsigned char>(c))) continue;
        if (c == '-' || c == '_' || c == '.' || c == ':' || c == '+') continue;
        return false;
    }
    return true;
}

std::string slugify(const std::string& name) {
    std::string out;
    for (char c : name) {
        if (std::isalnum(static_cast<unsigned char>(c)))
            out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        else if (!out.empty() && out.back() != '-')
            out += '-';
    }
    while (!out.empty() && out.back() == '-') out.pop_back();
    return out.empty() ? "actor" : out;
}

} // namespace

// ---------------------------------------------------------------------------
// Record equality

bool ThreatActor::operator==(const ThreatActor& other) const {
    return id == other.id && canonical_name == other.canonical_name &&
           asserted_types == other.asserted_types && description == other.description &&
           created == other.created && modified == other.modified &&
           source_object == other.source_object;
}

bool Activity::operator==(const Activity& other) const {
    return id == other.id && actor_id == other.actor_id && name == other.name &&
           interval == other.interval && attrs == other.attrs && evidence == other.evidence &&
           confidence == other.confidence;
}

bool RelationshipTriple::operator==(const RelationshipTriple& other) const {
    return subject == other.subject && predicate == other.predicate && object == other.object &&
           inferred == other.inferred && source == other.source;
}

bool RelationshipTriple::operator<(const RelationshipTriple& other) const {
    return std::tie(predicate, subject, object, inferred, source) <
           std::tie(other.predicate, other.subject, other.object, other.inferred, other.source);
}

// ---------------------------------------------------------------------------
// KnowledgeBase

PredicateRegistry PredicateRegistry::with_builtins() {
    PredicateRegistry registry;
    registry.entries["known-as"] = PredicateTraits{true, true};
    return registry;
}

KnowledgeBase::KnowledgeBase() : KnowledgeBase(builtin_profile_ptr()) {}

KnowledgeBase::KnowledgeBase(std::shared_ptr<const Profile> profile)
    : profile_(profile ? std::move(profile) : builtin_profile_ptr()),
      stored_profile_version_(profile_->profile_version),
      predicates_(PredicateRegistry::with_builtins()) {}

const ThreatActor* KnowledgeBase::find_actor(const std::string& id) const {
    auto it = actors_.find(id);
    return it == actors_.end() ? nullptr : &it->second;
}

const Activity* KnowledgeBase::find_activity(const std::string& id) const {
    auto it = activities_.find(id);
    return it == activities_.end() ? nullptr : &it->second;
}

std::vector<const Activity*> KnowledgeBase::activities_of(const std::string& actor_id) const {
    std::vector<const Activity*> out;
    for (const auto& [id, activity] : activities_)
        if (activity.actor_id == actor_id) out.push_back(&activity);
    return out;
}

bool KnowledgeBase::operator==(const KnowledgeBase& other) const {
    return stored_profile_version_ == other.stored_profile_version_ && actors_ == other.actors_ &&
           activities_ == other.activities_ && triples_ == other.triples_ &&
           predicates_ == other.predicates_ && passthrough_ == other.passthrough_;
}

// ---------------------------------------------------------------------------
// Mutations

std::string upsert_actor(KnowledgeBase& kb, ThreatActor actor) {
    if (actor.canonical_name.empty())
        throw ValidationError("actor canonical name must not be empty");
    if (actor.id.empty()) {
        std::string base = slugify(actor.canonical_name);
        actor.id = base;
        for (int n = 2; kb.actors_.count(actor.id); ++n)
            actor.id = base + "-" + std::to_string(n);
    }
    if (!valid_record_id(actor.id))
        throw ValidationError("malformed actor id \"" + actor.id + "\"");
    if (actor.created.empty()) actor.created = actor.modified.empty() ? now_utc() : actor.modified;
    if (actor.modified.empty()) actor.modified = now_utc();
    std::string id = actor.id;
    kb.actors_[id] = std::move(actor);
    return id;
}

std::vector<StoreDiagnostic> cardinality_findings(const Profile& profile, const std::string& subject,
                                                  const AttributeProfile& attrs) {
    std::vector<StoreDiagnostic> findings;
    for (const auto& attr : profile.attributes) {
        auto it = attrs.entries.find(attr.kind);
        if (it == attrs.entries.end()) continue; // absent is unknown, not a violation
        std::size_t count = it->second.size();
        if (!attr.cardinality.max_unbounded() && count > attr.cardinality.max) {
            std::string label = attr.kind;
            label[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(label[0])));
            findings.push_back({subject, "attribute " + attr.kind + " carries " +
                                             std::to_string(count) + " values; \"" + label + " " +
                                             attr.cardinality.annotation() + "\" allows at most " +
                                             std::to_string(attr.cardinality.max)});
        }
    }
    return findings;
}

std::string add_activity(KnowledgeBase& kb, Activity activity,
                         std::vector<StoreDiagnostic>* diagnostics) {
    if (activity.id.empty()) throw ValidationError("activity id must not be empty");
    if (!valid_record_id(activity.id))
        throw ValidationError("malformed activity id \"" + activity.id + "\"");
    if (!kb.find_actor(activity.actor_id))
        throw ValidationError("activity \"" + activity.id + "\" references unknown actor \"" +
                              activity.actor_id + "\"");
    if (activity.interval.start.empty())
        throw ValidationError("activity \"" + activity.id + "\" has no start timestamp");
    if (activity.interval.end && *activity.interval.end < activity.interval.start)
        throw ValidationError("activity \"" + activity.id + "\" starts after it ends");
    if (activity.confidence && (*activity.confidence < 0 || *activity.confidence > 100))
        throw ValidationError("activity \"" + activity.id + "\" confidence must be 0-100");

    // Re-validate terms against the active profile; canonicalizes aliases.
    activity.attrs = make_attribute_profile(kb.profile(), activity.attrs.entries);

    if (diagnostics) {
        auto findings = cardinality_findings(kb.profile(), activity.id, activity.attrs);
        diagnostics->insert(diagnostics->end(), findings.begin(), findings.end());
    }
    std::string id = activity.id;
    kb.activities_[id] = std::move(activity);
    return id;
}

std::size_t assert_triple(KnowledgeBase& kb, RelationshipTriple triple) {
    if (!kb.predicates_.registered(triple.predicate))
        throw ValidationError("unregistered predicate \"" + triple.predicate + "\"");
    if (triple.subject.empty() || triple.object.empty())
        throw ValidationError("triple subject and object must not be empty");
    triple.inferred = false;
    kb.triples_.push_back(std::move(triple));
    return kb.triples_.size() - 1;
}

void add_passthrough_object(KnowledgeBase& kb, const std::string& json_text) {
    json parsed;
    try {
        parsed = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("passthrough object is not valid JSON: ") + e.what());
    }
    if (!parsed.is_object()) throw ValidationError("passthrough object must be a JSON object");
    kb.passthrough_.push_back(parsed.dump());
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

json timestamp_to_json(const Timestamp& t) { return t.text(); }

Timestamp timestamp_from_json(const json& j, const std::string& where) {
    if (!j.is_string()) throw CorruptStoreError("timestamp in " + where + " must be a string");
    return Timestamp::parse(j.get<std::string>());
}

json actor_to_json(const ThreatActor& actor) {
    json j;
    j["id"] = actor.id;
    j["name"] = actor.canonical_name;
    json asserted = json::array();
    for (const auto& a : actor.asserted_types)
        asserted.push_back({{"type", a.type_id}, {"source", a.source}});
    j["asserted_types"] = std::move(asserted);
    j["description"] = actor.description;
    j["created"] = timestamp_to_json(actor.created);
    j["modified"] = timestamp_to_json(actor.modified);
    if (!actor.source_object.empty()) j["source_object"] = actor.source_object;
    return j;
}

json activity_to_json(const Activity& activity) {
    json j;
    j["id"] = activity.id;
    j["actor"] = activity.actor_id;
    j["name"] = activity.name;
    j["start"] = timestamp_to_json(activity.interval.start);
    if (activity.interval.end) j["end"] = timestamp_to_json(*activity.interval.end);
    json attrs = json::object();
    for (const auto& [kind, terms] : activity.attrs.entries) attrs[kind] = terms;
    j["attributes"] = std::move(attrs);
    j["evidence"] = activity.evidence;
    if (activity.confidence) j["confidence"] = *activity.confidence;
    return j;
}

json triple_to_json(const RelationshipTriple& t) {
    json j;
    j["subject"] = t.subject;
    j["predicate"] = t.predicate;
    j["object"] = t.object;
    j["inferred"] = t.inferred;
    j["source"] = t.source;
    return j;
}

json store_document(const KnowledgeBase& kb) {
    json doc;
    doc["format_version"] = KnowledgeBase::kFormatVersion;
    doc["profile_version"] = kb.profile().profile_version;
    json actors = json::array();
    for (const auto& [id, actor] : kb.actors()) actors.push_back(actor_to_json(actor));
    doc["actors"] = std::move(actors);
    json activities = json::array();
    for (const auto& [id, activity] : kb.activities())
        activities.push_back(activity_to_json(activity));
    doc["activities"] = std::move(activities);
    json triples = json::array();
    for (const auto& t : kb.triples())
        if (!t.inferred) triples.push_back(triple_to_json(t)); // inferred triples are never persisted
    doc["triples"] = std::move(triples);
    json predicates = json::object();
    for (const auto& [id, traits] : kb.predicates().entries)
        predicates[id] = {{"symmetric", traits.symmetric}, {"transitive", traits.transitive}};
    doc["predicates"] = std::move(predicates);
    json passthrough = json::array();
    for (const auto& text : kb.passthrough_objects()) passthrough.push_back(json::parse(text));
    doc["stix_passthrough"] = std::move(passthrough);
    return doc;
}

} // namespace

void save(const KnowledgeBase& kb, std::ostream& sink) {
    json doc = store_document(kb);
    doc["checksum"] = checksum_hex(doc.dump());
    sink << doc.dump(2) << "\n";
}

KnowledgeBase load(std::istream& source, std::shared_ptr<const Profile> profile) {
    std::ostringstream buffer;
    buffer << source.rdbuf();

    json doc;
    try {
        doc = json::parse(buffer.str());
    } catch (const json::parse_error& e) {
        throw CorruptStoreError(std::string("store file is not well-formed JSON: ") + e.what());
    }

    try {
        std::string version = doc.value("format_version", "");
        if (version != KnowledgeBase::kFormatVersion)
            throw FormatVersionError(version, KnowledgeBase::kFormatVersion);

        if (!doc.contains("checksum") || !doc["checksum"].is_string())
            throw CorruptStoreError("store file carries no checksum");
        std::string recorded = doc["checksum"].get<std::string>();
        doc.erase("checksum");
        std::string computed = checksum_hex(doc.dump());
        if (recorded != computed)
            throw CorruptStoreError("store checksum mismatch: recorded " + recorded +
                                    ", computed " + computed);

        KnowledgeBase kb(std::move(profile));
        kb.stored_profile_version_ = doc.value("profile_version", "");

        kb.predicates_.entries.clear();
        for (const auto& [id, traits] : doc.at("predicates").items())
            kb.predicates_.entries[id] =
                PredicateTraits{traits.value("symmetric", false), traits.value("transitive", false)};

        for (const json& ja : doc.at("actors")) {
            ThreatActor actor;
            actor.id = ja.at("id").get<std::string>();
            actor.canonical_name = ja.at("name").get<std::string>();
            for (const json& jt : ja.value("asserted_types", json::array()))
                actor.asserted_types.insert(
                    {jt.at("type").get<std::string>(), jt.value("source", "")});
            actor.description = ja.value("description", "");
            actor.created = timestamp_from_json(ja.at("created"), "actor " + actor.id);
            actor.modified = timestamp_from_json(ja.at("modified"), "actor " + actor.id);
            actor.source_object = ja.value("source_object", "");
            kb.actors_[actor.id] = std::move(actor);
        }

        for (const json& jv : doc.at("activities")) {
            Activity activity;
            activity.id = jv.at("id").get<std::string>();
            activity.actor_id = jv.at("actor").get<std::string>();
            activity.name = jv.value("name", "");
            activity.interval.start =
                timestamp_from_json(jv.at("start"), "activity " + activity.id);
            if (jv.contains("end"))
                activity.interval.end = timestamp_from_json(jv["end"], "activity " + activity.id);
            const json attrs_json = jv.value("attributes", json::object());
            for (const auto& [kind, terms] : attrs_json.items())
                for (const json& t : terms)
                    activity.attrs.entries[kind].insert(t.get<std::string>());
            for (const json& e : jv.value("evidence", json::array()))
                activity.evidence.push_back(e.get<std::string>());
            if (jv.contains("confidence")) activity.confidence = jv["confidence"].get<int>();
            if (!kb.actors_.count(activity.actor_id))
                throw CorruptStoreError("activity \"" + activity.id +
                                        "\" references unknown actor \"" + activity.actor_id +
                                        "\"");
            kb.activities_[activity.id] = std::move(activity);
        }

        for (const json& jt : doc.at("triples")) {
            RelationshipTriple triple;
            triple.subject = jt.at("subject").get<std::string>();
            triple.predicate = jt.at("predicate").get<std::string>();
            triple.object = jt.at("object").get<std::string>();
            triple.inferred = false;
            triple.source = jt.value("source", "");
            if (!kb.predicates_.registered(triple.predicate))
                throw CorruptStoreError("triple uses unregistered predicate \"" + triple.predicate +
                                        "\"");
            kb.triples_.push_back(std::move(triple));
        }

        for (const json& jp : doc.value("stix_passthrough", json::array()))
            kb.passthrough_.push_back(jp.dump());

        return kb;
    } catch (const json::exception& e) {
        throw CorruptStoreError(std::string("store file is malformed: ") + e.what());
    }
}

} // namespace actortype
