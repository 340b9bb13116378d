#include "actortype/expr.hpp"

#include <algorithm>
#include <cctype>

#include "actortype/errors.hpp"

namespace actortype {

// ---------------------------------------------------------------------------
// AST builders and equality

ClassExpression ClassExpression::and_of(std::vector<ClassExpression> children) {
    ClassExpression e;
    e.op = Op::And;
    e.children = std::move(children);
    return e;
}

ClassExpression ClassExpression::or_of(std::vector<ClassExpression> children) {
    ClassExpression e;
    e.op = Op::Or;
    e.children = std::move(children);
    return e;
}

ClassExpression ClassExpression::value(std::string kind, std::string property,
                                       std::string vocabulary, std::string term) {
    ClassExpression e;
    e.op = Op::Value;
    e.kind = std::move(kind);
    e.property = std::move(property);
    e.vocabulary = std::move(vocabulary);
    e.term = std::move(term);
    return e;
}

ClassExpression ClassExpression::some(std::string kind, std::string property,
                                      std::string vocabulary) {
    ClassExpression e;
    e.op = Op::Some;
    e.kind = std::move(kind);
    e.property = std::move(property);
    e.vocabulary = std::move(vocabulary);
    return e;
}

ClassExpression ClassExpression::at_least(std::string kind, std::string property,
                                          std::string vocabulary, std::string term) {
    ClassExpression e = value(std::move(kind), std::move(property), std::move(vocabulary),
                              std::move(term));
    e.op = Op::AtLeast;
    return e;
}

ClassExpression ClassExpression::at_most(std::string kind, std::string property,
                                         std::string vocabulary, std::string term) {
    ClassExpression e = value(std::move(kind), std::move(property), std::move(vocabulary),
                              std::move(term));
    e.op = Op::AtMost;
    return e;
}

bool ClassExpression::operator==(const ClassExpression& other) const {
    return op == other.op && kind == other.kind && property == other.property &&
           vocabulary == other.vocabulary && term == other.term && children == other.children;
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class TokenType { LParen, RParen, Identifier, QName, End };

struct Token {
    TokenType type = TokenType::End;
    std::string text;   // identifier, or full prefix:term for qnames
    std::string prefix; // qnames only
    std::string local;  // qnames only
    int line = 1;
    int column = 1;
};

bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

class Lexer {
public:
    explicit Lexer(const std::string& source) : src_(source) {}

    Token next() {
        skip_space();
        Token tok;
        tok.line = line_;
        tok.column = column_;
        if (pos_ >= src_.size()) {
            tok.type = TokenType::End;
            return tok;
        }
        char c = src_[pos_];
        if (c == '(') {
            advance();
            tok.type = TokenType::LParen;
            tok.text = "(";
            return tok;
        }
        if (c == ')') {
            advance();
            tok.type = TokenType::RParen;
            tok.text = ")";
            return tok;
        }
        if (!is_ident_start(c))
            throw ParseError(std::string("unexpected character '") + c + "'", line_, column_);
        std::string first = read_identifier();
        if (pos_ < src_.size() && src_[pos_] == ':') {
            advance();
            if (pos_ >= src_.size() || !is_ident_start(src_[pos_]))
                throw ParseError("expected term name after ':'", line_, column_);
            std::string second = read_identifier();
            tok.type = TokenType::QName;
            tok.prefix = first;
            tok.local = second;
            tok.text = first + ":" + second;
            return tok;
        }
        tok.type = TokenType::Identifier;
        tok.text = first;
        return tok;
    }

private:
    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        ++pos_;
    }

    void skip_space() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
            advance();
    }

    std::string read_identifier() {
        size_t start = pos_;
        while (pos_ < src_.size() && is_ident_char(src_[pos_])) advance();
        return src_.substr(start, pos_ - start);
    }

    const std::string& src_;
    size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;
};

bool iequals(const std::string& a, const std::string& b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) ==
                      std::tolower(static_cast<unsigned char>(y));
           });
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
public:
    Parser(const std::string& source, const Profile& profile)
        : lexer_(source), profile_(profile) {
        current_ = lexer_.next();
    }

    ClassExpression parse() {
        ClassExpression e = parse_or();
        expect(TokenType::End, "end of input");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& message) const {
        throw ParseError(message, current_.line, current_.column);
    }

    void consume() { current_ = lexer_.next(); }

    void expect(TokenType type, const char* what) {
        if (current_.type != type)
            fail(std::string("expected ") + what + ", found \"" +
                 (current_.type == TokenType::End ? "end of input" : current_.text) + "\"");
    }

    ClassExpression parse_or() {
        std::vector<ClassExpression> parts;
        parts.push_back(parse_and());
        while (current_.type == TokenType::Identifier && current_.text == "or") {
            consume();
            parts.push_back(parse_and());
        }
        if (parts.size() == 1) return std::move(parts.front());
        return ClassExpression::or_of(std::move(parts));
    }

    ClassExpression parse_and() {
        std::vector<ClassExpression> parts;
        parts.push_back(parse_atom());
        while (current_.type == TokenType::Identifier && current_.text == "and") {
            consume();
            parts.push_back(parse_atom());
        }
        if (parts.size() == 1) return std::move(parts.front());
        return ClassExpression::and_of(std::move(parts));
    }

    ClassExpression parse_atom() {
        if (current_.type == TokenType::LParen) {
            consume();
            ClassExpression inner = parse_or();
            expect(TokenType::RParen, "')'");
            consume();
            return inner;
        }
        expect(TokenType::Identifier, "a property name or '('");
        Token prop_tok = current_;
        const AttributeKind* attr = profile_.find_property(prop_tok.text);
        if (!attr)
            fail("unknown property \"" + prop_tok.text + "\"");
        consume();

        expect(TokenType::Identifier, "\"value\", \"some\", \"atLeast\" or \"atMost\"");
        std::string keyword = current_.text;
        Token kw_tok = current_;
        consume();

        if (keyword == "some") {
            expect(TokenType::Identifier, "a vocabulary class name");
            if (!iequals(current_.text, attr->vocabulary))
                fail("class \"" + current_.text + "\" does not name the vocabulary of property \"" +
                     attr->property_name + "\" (expected \"" + attr->vocabulary + "\")");
            consume();
            return ClassExpression::some(attr->kind, attr->property_name, attr->vocabulary);
        }

        if (keyword != "value" && keyword != "atLeast" && keyword != "atMost")
            throw ParseError("expected \"value\", \"some\", \"atLeast\" or \"atMost\", found \"" +
                                 keyword + "\"",
                             kw_tok.line, kw_tok.column);

        expect(TokenType::QName, "a vocabulary:term name");
        Token qname = current_;
        consume();
        if (qname.prefix != attr->vocabulary)
            throw ParseError("term \"" + qname.text + "\" does not belong to vocabulary \"" +
                                 attr->vocabulary + "\" of property \"" + attr->property_name +
                                 "\"",
                             qname.line, qname.column);
        const Vocabulary* vocab = profile_.find_vocabulary(attr->vocabulary);
        auto canonical = vocab ? vocab->resolve(qname.local) : std::nullopt;
        if (!canonical)
            throw ParseError("unknown term \"" + qname.text + "\"", qname.line, qname.column);

        if (keyword == "value")
            return ClassExpression::value(attr->kind, attr->property_name, attr->vocabulary,
                                          *canonical);
        if (!vocab->ordered)
            throw ParseError(keyword + " requires an ordered vocabulary, but \"" +
                                 attr->vocabulary + "\" is unordered",
                             kw_tok.line, kw_tok.column);
        if (keyword == "atLeast")
            return ClassExpression::at_least(attr->kind, attr->property_name, attr->vocabulary,
                                             *canonical);
        return ClassExpression::at_most(attr->kind, attr->property_name, attr->vocabulary,
                                        *canonical);
    }

    Lexer lexer_;
    const Profile& profile_;
    Token current_;
};

std::string capitalize(const std::string& s) {
    std::string out = s;
    if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    return out;
}

} // namespace

ClassExpression parse_expression(const std::string& source, const Profile& profile) {
    return Parser(source, profile).parse();
}

// ---------------------------------------------------------------------------
// Printing

std::string print_expression(const ClassExpression& expr) {
    switch (expr.op) {
        case ClassExpression::Op::And:
        case ClassExpression::Op::Or: {
            const char* joiner = expr.op == ClassExpression::Op::And ? " and " : " or ";
            std::string out = "(";
            for (size_t i = 0; i < expr.children.size(); ++i) {
                if (i) out += joiner;
                out += print_expression(expr.children[i]);
            }
            out += ")";
            return out;
        }
        case ClassExpression::Op::Value:
            return "(" + expr.property + " value " + expr.vocabulary + ":" + expr.term + ")";
        case ClassExpression::Op::Some:
            return "(" + expr.property + " some " + capitalize(expr.vocabulary) + ")";
        case ClassExpression::Op::AtLeast:
            return "(" + expr.property + " atLeast " + expr.vocabulary + ":" + expr.term + ")";
        case ClassExpression::Op::AtMost:
            return "(" + expr.property + " atMost " + expr.vocabulary + ":" + expr.term + ")";
    }
    return {};
}

// ---------------------------------------------------------------------------
// Leaf references

namespace {
void collect_terms(const ClassExpression& expr, std::set<ExpressionTermRef>& out) {
    if (expr.is_leaf()) {
        ExpressionTermRef ref;
        ref.kind = expr.kind;
        if (expr.op == ClassExpression::Op::Some)
            ref.some = true;
        else
            ref.term = expr.term;
        out.insert(std::move(ref));
        return;
    }
    for (const auto& child : expr.children) collect_terms(child, out);
}
} // namespace

std::set<ExpressionTermRef> expression_terms(const ClassExpression& expr) {
    std::set<ExpressionTermRef> out;
    collect_terms(expr, out);
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation

const std::set<std::string>& AttributeProfile::terms_for(const std::string& kind) const {
    static const std::set<std::string> kEmpty;
    auto it = entries.find(kind);
    return it == entries.end() ? kEmpty : it->second;
}

AttributeProfile make_attribute_profile(
    const Profile& profile, const std::map<std::string, std::set<std::string>>& raw_entries) {
    AttributeProfile attrs;
    for (const auto& [kind, terms] : raw_entries) {
        const AttributeKind* attr = profile.find_kind(kind);
        if (!attr) throw ValidationError("unknown attribute kind \"" + kind + "\"");
        const Vocabulary* vocab = profile.find_vocabulary(attr->vocabulary);
        std::set<std::string> canonical;
        for (const auto& term : terms) {
            auto resolved = vocab->resolve(term);
            if (!resolved)
                throw ValidationError("unknown term \"" + attr->vocabulary + ":" + term + "\"");
            canonical.insert(*resolved);
        }
        if (!canonical.empty()) attrs.entries[kind] = std::move(canonical);
    }
    return attrs;
}

namespace {

std::vector<std::string> qualified(const std::string& vocabulary,
                                   const std::set<std::string>& terms) {
    std::vector<std::string> out;
    out.reserve(terms.size());
    for (const auto& t : terms) out.push_back(vocabulary + ":" + t);
    return out;
}

SatisfactionTrace evaluate_node(const ClassExpression& expr, const AttributeProfile& attrs,
                                const Profile& profile) {
    SatisfactionTrace trace;
    trace.expression = print_expression(expr);

    switch (expr.op) {
        case ClassExpression::Op::And:
        case ClassExpression::Op::Or: {
            bool all = true, any = false;
            for (const auto& child : expr.children) {
                trace.children.push_back(evaluate_node(child, attrs, profile));
                all = all && trace.children.back().satisfied;
                any = any || trace.children.back().satisfied;
            }
            trace.satisfied = expr.op == ClassExpression::Op::And ? all : any;
            return trace;
        }
        case ClassExpression::Op::Value: {
            const auto& observed = attrs.terms_for(expr.kind);
            trace.satisfied = observed.count(expr.term) > 0;
            if (trace.satisfied)
                trace.matched_terms = {expr.vocabulary + ":" + expr.term};
            return trace;
        }
        case ClassExpression::Op::Some: {
            const auto& observed = attrs.terms_for(expr.kind);
            trace.satisfied = !observed.empty();
            trace.matched_terms = qualified(expr.vocabulary, observed);
            return trace;
        }
        case ClassExpression::Op::AtLeast:
        case ClassExpression::Op::AtMost: {
            const auto& observed = attrs.terms_for(expr.kind);
            std::size_t bound = term_rank(profile, expr.vocabulary, expr.term);
            std::set<std::string> within;
            bool violation = false;
            for (const auto& t : observed) {
                std::size_t r = term_rank(profile, expr.vocabulary, t);
                bool ok = expr.op == ClassExpression::Op::AtLeast ? r >= bound : r <= bound;
                if (ok)
                    within.insert(t);
                else
                    violation = true;
            }
            if (expr.op == ClassExpression::Op::AtLeast)
                trace.satisfied = !within.empty();
            else
                trace.satisfied = !observed.empty() && !violation;
            trace.matched_terms = qualified(expr.vocabulary, within);
            return trace;
        }
    }
    return trace;
}

} // namespace

SatisfactionTrace evaluate(const ClassExpression& expr, const AttributeProfile& attrs,
                           const Profile& profile) {
    return evaluate_node(expr, attrs, profile);
}

} // namespace actortype
