#include "actortype/profile.hpp"

#include <json.hpp>
#include <sstream>

#include "actortype/errors.hpp"
#include "actortype/expr.hpp"

using nlohmann::json;

namespace actortype {

namespace detail {
// Defined in the generated builtin_data.cpp.
extern const char* const kBuiltinProfileJson;
} // namespace detail

// ---------------------------------------------------------------------------
// Lookups

std::optional<std::string> Vocabulary::resolve(const std::string& id_or_alias) const {
    for (const auto& term : terms) {
        if (term.id == id_or_alias) return term.id;
        if (term.aliases.count(id_or_alias)) return term.id;
    }
    return std::nullopt;
}

const Term* Vocabulary::find(const std::string& canonical_id) const {
    for (const auto& term : terms)
        if (term.id == canonical_id) return &term;
    return nullptr;
}

const Vocabulary* Profile::find_vocabulary(const std::string& id) const {
    for (const auto& v : vocabularies)
        if (v.id == id) return &v;
    return nullptr;
}

const AttributeKind* Profile::find_kind(const std::string& kind) const {
    for (const auto& a : attributes)
        if (a.kind == kind) return &a;
    return nullptr;
}

const AttributeKind* Profile::find_property(const std::string& property_name) const {
    for (const auto& a : attributes)
        if (a.property_name == property_name) return &a;
    return nullptr;
}

const TypeRule* Profile::find_type(const std::string& type_id) const {
    for (const auto& t : types)
        if (t.id == type_id) return &t;
    return nullptr;
}

std::string Cardinality::annotation() const {
    if (max_unbounded()) return min == 0 ? "(0 or more)" : "(" + std::to_string(min) + " or more)";
    if (min == max) return "(" + std::to_string(min) + ")";
    return "(" + std::to_string(min) + "-" + std::to_string(max) + ")";
}

std::size_t term_rank(const Profile& profile, const std::string& vocabulary,
                      const std::string& term) {
    const Vocabulary* vocab = profile.find_vocabulary(vocabulary);
    if (!vocab) throw ValidationError("unknown vocabulary \"" + vocabulary + "\"");
    if (!vocab->ordered)
        throw ValidationError("vocabulary \"" + vocabulary + "\" is unordered and has no ranks");
    auto canonical = vocab->resolve(term);
    if (!canonical)
        throw ValidationError("unknown term \"" + vocabulary + ":" + term + "\"");
    for (std::size_t i = 0; i < vocab->terms.size(); ++i)
        if (vocab->terms[i].id == *canonical) return i;
    return 0; // unreachable: resolve() succeeded
}

// ---------------------------------------------------------------------------
// Loading

namespace {

const json& require(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end())
        throw ValidationError("missing \"" + std::string(key) + "\" in " + where);
    return *it;
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_string())
        throw ValidationError("\"" + std::string(key) + "\" in " + where + " must be a string");
    return v.get<std::string>();
}

void check_identifier(const std::string& id, const std::string& what) {
    if (id.empty()) throw ValidationError(what + " must not be empty");
    for (char c : id)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_')
            throw ValidationError(what + " \"" + id + "\" contains invalid character '" +
                                  std::string(1, c) + "'");
    if (std::isdigit(static_cast<unsigned char>(id[0])))
        throw ValidationError(what + " \"" + id + "\" must not start with a digit");
}

Vocabulary parse_vocabulary(const json& jv) {
    Vocabulary vocab;
    vocab.id = require_string(jv, "id", "vocabulary");
    check_identifier(vocab.id, "vocabulary id");
    vocab.ordered = jv.value("ordered", false);
    const std::string where = "vocabulary \"" + vocab.id + "\"";

    std::set<std::string> seen; // term ids and aliases share one namespace
    for (const json& jt : require(jv, "terms", where)) {
        Term term;
        term.id = require_string(jt, "id", where);
        check_identifier(term.id, "term id");
        term.label = jt.value("label", term.id);
        term.definition = jt.value("definition", "");
        if (!seen.insert(term.id).second)
            throw ValidationError("duplicate term \"" + term.id + "\" in " + where);
        if (jt.contains("aliases")) {
            for (const json& ja : jt["aliases"]) {
                std::string alias = ja.get<std::string>();
                check_identifier(alias, "term alias");
                if (!seen.insert(alias).second)
                    throw ValidationError("alias \"" + alias + "\" collides with a term or alias in " +
                                          where);
                term.aliases.insert(alias);
            }
        }
        vocab.terms.push_back(std::move(term));
    }
    if (vocab.terms.empty()) throw ValidationError(where + " declares no terms");
    return vocab;
}

AttributeKind parse_attribute(const json& ja, const Profile& profile) {
    AttributeKind attr;
    attr.kind = require_string(ja, "kind", "attribute");
    check_identifier(attr.kind, "attribute kind");
    const std::string where = "attribute \"" + attr.kind + "\"";
    attr.property_name = require_string(ja, "property", where);
    check_identifier(attr.property_name, "property name");
    attr.vocabulary = require_string(ja, "vocabulary", where);
    if (!profile.find_vocabulary(attr.vocabulary))
        throw ValidationError(where + " references unknown vocabulary \"" + attr.vocabulary +
                              "\"");
    const json& jc = require(ja, "cardinality", where);
    attr.cardinality.min = jc.value("min", 0u);
    if (jc.contains("max")) {
        if (!jc["max"].is_number_unsigned())
            throw ValidationError("cardinality max in " + where + " must be a count");
        attr.cardinality.max = jc["max"].get<std::size_t>();
    } else {
        attr.cardinality.max = Cardinality::unbounded();
    }
    if (!attr.cardinality.max_unbounded() && attr.cardinality.min > attr.cardinality.max)
        throw ValidationError("cardinality min exceeds max in " + where);
    return attr;
}

Profile load_profile_document(const json& doc) {
    Profile profile;
    profile.profile_version = require_string(doc, "profile_version", "profile");

    for (const json& jv : require(doc, "vocabularies", "profile")) {
        Vocabulary vocab = parse_vocabulary(jv);
        if (profile.find_vocabulary(vocab.id))
            throw ValidationError("duplicate vocabulary \"" + vocab.id + "\"");
        profile.vocabularies.push_back(std::move(vocab));
    }

    for (const json& ja : require(doc, "attributes", "profile")) {
        AttributeKind attr = parse_attribute(ja, profile);
        if (profile.find_kind(attr.kind))
            throw ValidationError("duplicate attribute kind \"" + attr.kind + "\"");
        if (profile.find_property(attr.property_name))
            throw ValidationError("duplicate property name \"" + attr.property_name + "\"");
        profile.attributes.push_back(std::move(attr));
    }

    for (const json& jt : require(doc, "types", "profile")) {
        TypeRule rule;
        rule.id = require_string(jt, "id", "type rule");
        check_identifier(rule.id, "type rule id");
        const std::string where = "type rule \"" + rule.id + "\"";
        if (profile.find_type(rule.id))
            throw ValidationError("duplicate type rule \"" + rule.id + "\"");
        rule.label = jt.value("label", rule.id);
        std::string hostility = require_string(jt, "hostility", where);
        if (hostility == "hostile")
            rule.hostility = Hostility::Hostile;
        else if (hostility == "nonHostile")
            rule.hostility = Hostility::NonHostile;
        else
            throw ValidationError(where + " has unknown hostility \"" + hostility + "\"");
        rule.source = jt.value("source", "");
        rule.expression_source = require_string(jt, "expression", where);
        try {
            rule.expression = parse_expression(rule.expression_source, profile);
        } catch (const Error& e) {
            throw ValidationError("in expression of " + where + ": " + e.what());
        }
        profile.types.push_back(std::move(rule));
    }

    return profile;
}

} // namespace

Profile load_profile_text(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("profile is not well-formed JSON: ") + e.what(), 1, 1);
    }
    try {
        return load_profile_document(doc);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("profile document is malformed: ") + e.what());
    }
}

Profile load_profile(std::istream& source) {
    std::ostringstream buffer;
    buffer << source.rdbuf();
    return load_profile_text(buffer.str());
}

// ---------------------------------------------------------------------------
// Serialization

std::string serialize_profile(const Profile& profile) {
    json doc;
    doc["profile_version"] = profile.profile_version;

    json jvocabs = json::array();
    for (const auto& vocab : profile.vocabularies) {
        json jv;
        jv["id"] = vocab.id;
        jv["ordered"] = vocab.ordered;
        json jterms = json::array();
        for (const auto& term : vocab.terms) {
            json jt;
            jt["id"] = term.id;
            jt["label"] = term.label;
            jt["definition"] = term.definition;
            if (!term.aliases.empty()) jt["aliases"] = term.aliases;
            jterms.push_back(std::move(jt));
        }
        jv["terms"] = std::move(jterms);
        jvocabs.push_back(std::move(jv));
    }
    doc["vocabularies"] = std::move(jvocabs);

    json jattrs = json::array();
    for (const auto& attr : profile.attributes) {
        json ja;
        ja["kind"] = attr.kind;
        ja["property"] = attr.property_name;
        ja["vocabulary"] = attr.vocabulary;
        json jc;
        jc["min"] = attr.cardinality.min;
        if (!attr.cardinality.max_unbounded()) jc["max"] = attr.cardinality.max;
        ja["cardinality"] = std::move(jc);
        jattrs.push_back(std::move(ja));
    }
    doc["attributes"] = std::move(jattrs);

    json jtypes = json::array();
    for (const auto& rule : profile.types) {
        json jt;
        jt["id"] = rule.id;
        jt["label"] = rule.label;
        jt["hostility"] = rule.hostility == Hostility::Hostile ? "hostile" : "nonHostile";
        jt["source"] = rule.source;
        jt["expression"] = rule.expression_source;
        jtypes.push_back(std::move(jt));
    }
    doc["types"] = std::move(jtypes);

    return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Equality

namespace {
bool operator_eq(const Term& a, const Term& b) {
    return a.id == b.id && a.label == b.label && a.definition == b.definition &&
           a.aliases == b.aliases;
}
} // namespace

bool operator==(const Profile& a, const Profile& b) {
    if (a.profile_version != b.profile_version) return false;
    if (a.vocabularies.size() != b.vocabularies.size() ||
        a.attributes.size() != b.attributes.size() || a.types.size() != b.types.size())
        return false;
    for (size_t i = 0; i < a.vocabularies.size(); ++i) {
        const auto& va = a.vocabularies[i];
        const auto& vb = b.vocabularies[i];
        if (va.id != vb.id || va.ordered != vb.ordered || va.terms.size() != vb.terms.size())
            return false;
        for (size_t j = 0; j < va.terms.size(); ++j)
            if (!operator_eq(va.terms[j], vb.terms[j])) return false;
    }
    for (size_t i = 0; i < a.attributes.size(); ++i) {
        const auto& aa = a.attributes[i];
        const auto& ab = b.attributes[i];
        if (aa.kind != ab.kind || aa.property_name != ab.property_name ||
            aa.vocabulary != ab.vocabulary || aa.cardinality.min != ab.cardinality.min ||
            aa.cardinality.max != ab.cardinality.max)
            return false;
    }
    for (size_t i = 0; i < a.types.size(); ++i) {
        const auto& ta = a.types[i];
        const auto& tb = b.types[i];
        if (ta.id != tb.id || ta.label != tb.label || ta.hostility != tb.hostility ||
            ta.source != tb.source || ta.expression_source != tb.expression_source ||
            ta.expression != tb.expression)
            return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Builtin

const std::string& builtin_profile_json() {
    static const std::string text = detail::kBuiltinProfileJson;
    return text;
}

const Profile& builtin_profile() {
    static const Profile profile = load_profile_text(builtin_profile_json());
    return profile;
}

} // namespace actortype
