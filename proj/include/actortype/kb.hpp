#ifndef ACTORTYPE_KB_HPP
#define ACTORTYPE_KB_HPP

#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "actortype/expr.hpp"
#include "actortype/profile.hpp"
#include "actortype/timestamp.hpp"

namespace actortype {

/// Manual type classification with its citation.
struct TypeAssertion {
    std::string type_id;
    std::string source;

    bool operator<(const TypeAssertion& other) const {
        return std::tie(type_id, source) < std::tie(other.type_id, other.source);
    }
    bool operator==(const TypeAssertion& other) const {
        return type_id == other.type_id && source == other.source;
    }
};

struct ThreatActor {
    std::string id;
    std::string canonical_name;
    std::set<TypeAssertion> asserted_types; // checked against the profile at classify time
    std::string description;                // opaque text, never parsed for attributes
    Timestamp created;
    Timestamp modified;
    std::string source_object; // original imported record (JSON text), kept verbatim for export

    bool operator==(const ThreatActor& other) const;
};

/// A temporally scoped operation attributed to one actor, carrying the
/// attribute assertions evidence was derived for.
struct Activity {
    std::string id;
    std::string actor_id;
    std::string name;
    TimeInterval interval;
    AttributeProfile attrs;
    std::vector<std::string> evidence;
    std::optional<int> confidence; // 0-100 passthrough; never reasoned over

    bool operator==(const Activity& other) const;
};

struct RelationshipTriple {
    std::string subject; // identifier or name
    std::string predicate;
    std::string object; // identifier or name
    bool inferred = false;
    std::string source;

    bool operator==(const RelationshipTriple& other) const;
    bool operator<(const RelationshipTriple& other) const;
};

struct PredicateTraits {
    bool symmetric = false;
    bool transitive = false;

    bool operator==(const PredicateTraits& other) const {
        return symmetric == other.symmetric && transitive == other.transitive;
    }
};

/// Registered predicates and their closure behavior. `known-as` ships
/// symmetric and transitive.
struct PredicateRegistry {
    std::map<std::string, PredicateTraits> entries;

    static PredicateRegistry with_builtins();
    bool registered(const std::string& predicate) const { return entries.count(predicate) > 0; }

    bool operator==(const PredicateRegistry& other) const { return entries == other.entries; }
};

/// Non-fatal diagnostic produced while storing data (e.g. cardinality notes).
struct StoreDiagnostic {
    std::string subject;
    std::string message;
};

/// The file-backed store of actors, activities, and relationship triples.
///
/// Plain value type: a copy is a consistent snapshot. Mutations go through
/// the functions below (single-writer discipline); readers work on copies.
class KnowledgeBase {
public:
    static constexpr const char* kFormatVersion = "1";

    KnowledgeBase();
    explicit KnowledgeBase(std::shared_ptr<const Profile> profile);

    const Profile& profile() const { return *profile_; }
    std::shared_ptr<const Profile> profile_ptr() const { return profile_; }

    const std::map<std::string, ThreatActor>& actors() const { return actors_; }
    const std::map<std::string, Activity>& activities() const { return activities_; }
    const std::vector<RelationshipTriple>& triples() const { return triples_; }
    const PredicateRegistry& predicates() const { return predicates_; }

    /// Imported objects this store does not model, kept verbatim (canonical
    /// JSON text) so exports can reproduce them field for field.
    const std::vector<std::string>& passthrough_objects() const { return passthrough_; }

    const ThreatActor* find_actor(const std::string& id) const;
    const Activity* find_activity(const std::string& id) const;
    std::vector<const Activity*> activities_of(const std::string& actor_id) const;

    /// Profile version the store was last written with (informational).
    const std::string& stored_profile_version() const { return stored_profile_version_; }

    bool operator==(const KnowledgeBase& other) const;

private:
    std::shared_ptr<const Profile> profile_;
    std::string stored_profile_version_;
    std::map<std::string, ThreatActor> actors_;
    std::map<std::string, Activity> activities_;
    std::vector<RelationshipTriple> triples_;
    PredicateRegistry predicates_;
    std::vector<std::string> passthrough_;

    friend std::string upsert_actor(KnowledgeBase& kb, ThreatActor actor);
    friend std::string add_activity(KnowledgeBase& kb, Activity activity,
                                    std::vector<StoreDiagnostic>* diagnostics);
    friend std::size_t assert_triple(KnowledgeBase& kb, RelationshipTriple triple);
    friend void add_passthrough_object(KnowledgeBase& kb, const std::string& json_text);
    friend void save(const KnowledgeBase& kb, std::ostream& sink);
    friend KnowledgeBase load(std::istream& source, std::shared_ptr<const Profile> profile);
};

/// Inserts or replaces an actor by id. A missing id is derived from the
/// canonical name; a missing modified timestamp is stamped with the current
/// time (imports always supply source-derived timestamps). Returns the id.
std::string upsert_actor(KnowledgeBase& kb, ThreatActor actor);

/// Stores an activity after validating the actor reference, interval, and
/// attribute terms (aliases canonicalized). Cardinality findings are
/// appended to `diagnostics` when given; they never reject the activity.
std::string add_activity(KnowledgeBase& kb, Activity activity,
                         std::vector<StoreDiagnostic>* diagnostics = nullptr);

/// Stores an asserted (inferred=false) triple. The predicate must be
/// registered. Returns the triple's index.
std::size_t assert_triple(KnowledgeBase& kb, RelationshipTriple triple);

/// Keeps an unmodeled imported object for later re-export. The text must be
/// a JSON object; it is stored in canonical compact form.
void add_passthrough_object(KnowledgeBase& kb, const std::string& json_text);

/// Cardinality annotations violated by an attribute profile, in registry order.
std::vector<StoreDiagnostic> cardinality_findings(const Profile& profile, const std::string& subject,
                                                  const AttributeProfile& attrs);

/// Writes the store as a single JSON document with a trailing content
/// checksum. load(save(kb)) == kb, timestamps included.
void save(const KnowledgeBase& kb, std::ostream& sink);

/// Reads a store file. Throws FormatVersionError on version mismatch and
/// CorruptStoreError on malformed input or checksum failure.
KnowledgeBase load(std::istream& source, std::shared_ptr<const Profile> profile = nullptr);

} // namespace actortype

#endif // ACTORTYPE_KB_HPP
