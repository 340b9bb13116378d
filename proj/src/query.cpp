#include "actortype/query.hpp"

#include <algorithm>
#include <cctype>

#include "actortype/errors.hpp"

namespace actortype {

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct QueryToken {
    std::string text;
    int column = 1;
    bool quoted = false;
    bool end = false;
};

class QueryLexer {
public:
    explicit QueryLexer(const std::string& src) : src_(src) {}

    QueryToken next() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        QueryToken tok;
        tok.column = static_cast<int>(pos_) + 1;
        if (pos_ >= src_.size()) {
            tok.end = true;
            return tok;
        }
        char c = src_[pos_];
        if (c == '"') {
            ++pos_;
            size_t start = pos_;
            while (pos_ < src_.size() && src_[pos_] != '"') ++pos_;
            if (pos_ >= src_.size())
                throw ParseError("unterminated quoted value", 1, tok.column);
            tok.text = src_.substr(start, pos_ - start);
            tok.quoted = true;
            ++pos_;
            return tok;
        }
        if (c == '=' || c == '!' || c == '<' || c == '>') {
            size_t start = pos_;
            ++pos_;
            if (pos_ < src_.size() && src_[pos_] == '=') ++pos_;
            tok.text = src_.substr(start, pos_ - start);
            return tok;
        }
        size_t start = pos_;
        while (pos_ < src_.size() && !std::isspace(static_cast<unsigned char>(src_[pos_])) &&
               src_[pos_] != '=' && src_[pos_] != '!' && src_[pos_] != '<' && src_[pos_] != '>' &&
               src_[pos_] != '"')
            ++pos_;
        tok.text = src_.substr(start, pos_ - start);
        return tok;
    }

private:
    const std::string& src_;
    size_t pos_ = 0;
};

Condition::Op parse_op(const QueryToken& tok) {
    if (tok.text == "=") return Condition::Op::Eq;
    if (tok.text == "!=") return Condition::Op::Ne;
    if (tok.text == ">=") return Condition::Op::Ge;
    if (tok.text == "<=") return Condition::Op::Le;
    if (tok.text == ">") return Condition::Op::Gt;
    if (tok.text == "<") return Condition::Op::Lt;
    throw ParseError("expected an operator (=, !=, >=, <=, >, <), found \"" + tok.text + "\"", 1,
                     tok.column);
}

bool is_ordering(Condition::Op op) {
    return op == Condition::Op::Ge || op == Condition::Op::Le || op == Condition::Op::Gt ||
           op == Condition::Op::Lt;
}

} // namespace

Query parse_query(const std::string& source) {
    QueryLexer lexer(source);

    QueryToken tok = lexer.next();
    Query query;
    if (tok.text == "actors")
        query.target = Query::Target::Actors;
    else if (tok.text == "activities")
        query.target = Query::Target::Activities;
    else
        throw ParseError("expected target \"actors\" or \"activities\", found \"" + tok.text + "\"",
                         1, tok.column);

    tok = lexer.next();
    if (tok.text != "where")
        throw ParseError("expected \"where\", found \"" + tok.text + "\"", 1, tok.column);

    while (true) {
        QueryToken field_tok = lexer.next();
        if (field_tok.end) throw ParseError("expected a condition", 1, field_tok.column);
        Condition cond;
        const std::string& f = field_tok.text;
        if (f == "inferred_type")
            cond.field = Condition::Field::InferredType;
        else if (f == "asserted_type")
            cond.field = Condition::Field::AssertedType;
        else if (f == "start")
            cond.field = Condition::Field::Start;
        else if (f == "end")
            cond.field = Condition::Field::End;
        else if (f == "alias")
            cond.field = Condition::Field::Alias;
        else if (f == "actor")
            cond.field = Condition::Field::Actor;
        else if (f.rfind("attribute.", 0) == 0 && f.size() > 10) {
            cond.field = Condition::Field::Attribute;
            cond.attribute_kind = f.substr(10);
        } else {
            throw ParseError("unknown field \"" + f + "\"", 1, field_tok.column);
        }

        QueryToken op_tok = lexer.next();
        if (op_tok.end) throw ParseError("expected an operator", 1, op_tok.column);
        cond.op = parse_op(op_tok);

        bool temporal = cond.field == Condition::Field::Start || cond.field == Condition::Field::End;
        if (is_ordering(cond.op) && !temporal)
            throw ParseError("operator \"" + op_tok.text + "\" only applies to start/end", 1,
                             op_tok.column);

        QueryToken value_tok = lexer.next();
        if (value_tok.end) throw ParseError("expected a value", 1, value_tok.column);
        cond.value = value_tok.text;
        if (temporal) {
            auto parsed = Timestamp::try_parse(cond.value);
            if (!parsed)
                throw ParseError("ill-typed value \"" + cond.value +
                                     "\" for " + f + " (expected an RFC 3339 date or date-time)",
                                 1, value_tok.column);
            cond.timestamp = *parsed;
        }
        query.conjuncts.push_back(std::move(cond));

        QueryToken sep = lexer.next();
        if (sep.end) break;
        if (sep.text != "and")
            throw ParseError("expected \"and\" or end of query, found \"" + sep.text + "\"", 1,
                             sep.column);
    }
    return query;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

// Name equivalence classes under the known-as closure: id, canonical name,
// and every name reachable from either.
struct AliasIndex {
    std::vector<std::pair<std::string, std::string>> known_as; // closed, symmetric

    explicit AliasIndex(const KnowledgeBase& kb) {
        for (const auto& triple : kb.triples())
            if (triple.predicate == "known-as") known_as.push_back({triple.subject, triple.object});
        for (const auto& triple : relationship_closure(kb))
            if (triple.predicate == "known-as") known_as.push_back({triple.subject, triple.object});
    }

    std::set<std::string> names_of(const ThreatActor& actor) const {
        std::set<std::string> names = {actor.id, actor.canonical_name};
        for (const auto& [s, o] : known_as) {
            if (names.count(s)) names.insert(o);
            if (names.count(o)) names.insert(s);
        }
        return names;
    }
};

bool compare_instant(const std::optional<Timestamp>& endpoint, bool missing_is_past,
                     Condition::Op op, const Timestamp& value) {
    // Missing endpoints act as -infinity (start) or +infinity (end).
    if (!endpoint) {
        switch (op) {
            case Condition::Op::Eq: return false;
            case Condition::Op::Ne: return true;
            case Condition::Op::Ge:
            case Condition::Op::Gt: return !missing_is_past;
            case Condition::Op::Le:
            case Condition::Op::Lt: return missing_is_past;
        }
        return false;
    }
    std::int64_t a = endpoint->epoch_millis();
    std::int64_t b = value.epoch_millis();
    switch (op) {
        case Condition::Op::Eq: return a == b;
        case Condition::Op::Ne: return a != b;
        case Condition::Op::Ge: return a >= b;
        case Condition::Op::Le: return a <= b;
        case Condition::Op::Gt: return a > b;
        case Condition::Op::Lt: return a < b;
    }
    return false;
}

const TypeTimeline* timeline_of(const std::map<std::string, TypeTimeline>& timelines,
                                const std::string& actor_id) {
    auto it = timelines.find(actor_id);
    return it == timelines.end() ? nullptr : &it->second;
}

bool actor_matches(const Condition& cond, const ThreatActor& actor, const KnowledgeBase& kb,
                   const std::map<std::string, TypeTimeline>& timelines, const AliasIndex& aliases) {
    const TypeTimeline* timeline = timeline_of(timelines, actor.id);
    switch (cond.field) {
        case Condition::Field::InferredType: {
            bool any = false;
            if (timeline)
                for (const auto& entry : timeline->entries)
                    any = any || (entry.origin == InferenceOrigin::Inferred &&
                                  entry.type_id == cond.value);
            return cond.op == Condition::Op::Eq ? any : !any;
        }
        case Condition::Field::AssertedType: {
            bool any = false;
            for (const auto& assertion : actor.asserted_types)
                any = any || assertion.type_id == cond.value;
            return cond.op == Condition::Op::Eq ? any : !any;
        }
        case Condition::Field::Attribute: {
            bool any = false;
            for (const Activity* activity : kb.activities_of(actor.id))
                any = any || activity->attrs.terms_for(cond.attribute_kind).count(cond.value) > 0;
            return cond.op == Condition::Op::Eq ? any : !any;
        }
        case Condition::Field::Alias: {
            bool any = aliases.names_of(actor).count(cond.value) > 0;
            return cond.op == Condition::Op::Eq ? any : !any;
        }
        case Condition::Field::Actor: {
            bool any = actor.id == cond.value || actor.canonical_name == cond.value;
            return cond.op == Condition::Op::Eq ? any : !any;
        }
        case Condition::Field::Start:
        case Condition::Field::End: {
            if (!timeline) return false;
            bool start = cond.field == Condition::Field::Start;
            for (const auto& entry : timeline->entries) {
                const auto& endpoint = start ? entry.interval.start : entry.interval.end;
                if (compare_instant(endpoint, start, cond.op, cond.timestamp)) return true;
            }
            return false;
        }
    }
    return false;
}

bool activity_matches(const Condition& cond, const Activity& activity, const KnowledgeBase& kb,
                      const std::map<std::string, TypeTimeline>& timelines,
                      const AliasIndex& aliases) {
    const ThreatActor* actor = kb.find_actor(activity.actor_id);
    switch (cond.field) {
        case Condition::Field::InferredType: {
            bool any = false;
            if (const TypeTimeline* timeline = timeline_of(timelines, activity.actor_id))
                for (const auto& entry : timeline->entries)
                    any = any || (entry.subject == activity.id && entry.type_id == cond.value);
            return cond.op == Condition::Op::Eq ? any : !any;
        }
        case Condition::Field::AssertedType: {
            bool any = false;
            if (actor)
                for (const auto& assertion : actor->asserted_types)
                    any = any || assertion.type_id == cond.value;
            return cond.op == Condition::Op::Eq ? any : !any;
        }
        case Condition::Field::Attribute: {
            bool any = activity.attrs.terms_for(cond.attribute_kind).count(cond.value) > 0;
            return cond.op == Condition::Op::Eq ? any : !any;
        }
        case Condition::Field::Alias:
        case Condition::Field::Actor: {
            bool any = activity.actor_id == cond.value;
            if (!any && actor) any = aliases.names_of(*actor).count(cond.value) > 0;
            return cond.op == Condition::Op::Eq ? any : !any;
        }
        case Condition::Field::Start:
            return compare_instant(activity.interval.start, true, cond.op, cond.timestamp);
        case Condition::Field::End:
            return compare_instant(activity.interval.end, false, cond.op, cond.timestamp);
    }
    return false;
}

} // namespace

std::vector<QueryRow> run_query(const Query& query, const KnowledgeBase& kb,
                                const std::map<std::string, TypeTimeline>& timelines) {
    AliasIndex aliases(kb);
    std::vector<QueryRow> rows;

    if (query.target == Query::Target::Actors) {
        for (const auto& [id, actor] : kb.actors()) {
            bool all = true;
            for (const auto& cond : query.conjuncts)
                all = all && actor_matches(cond, actor, kb, timelines, aliases);
            if (!all) continue;
            QueryRow row;
            row.id = id;
            row.fields["name"] = actor.canonical_name;
            rows.push_back(std::move(row));
        }
    } else {
        for (const auto& [id, activity] : kb.activities()) {
            bool all = true;
            for (const auto& cond : query.conjuncts)
                all = all && activity_matches(cond, activity, kb, timelines, aliases);
            if (!all) continue;
            QueryRow row;
            row.id = id;
            row.fields["actor"] = activity.actor_id;
            row.fields["name"] = activity.name;
            row.fields["start"] = activity.interval.start.text();
            rows.push_back(std::move(row));
        }
    }
    return rows; // map iteration is already id-ordered
}

} // namespace actortype
