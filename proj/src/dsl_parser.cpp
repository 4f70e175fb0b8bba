#include "dslq/dsl_parser.hpp"

#include <cctype>

#include <json.hpp>

#include "dslq/schema.hpp"

namespace dslq {

namespace {

using Kind = ParseError::Kind;

[[noreturn]] void syntax_error(std::size_t pos, const std::string& expected) {
    throw ParseError(Kind::SqlSyntax,
                     "SQL syntax error at offset " + std::to_string(pos) + ": expected " + expected,
                     pos);
}

std::int64_t digits_to_int(const std::string& digits, std::size_t pos) {
    try {
        return std::stoll(digits);
    } catch (const std::exception&) {
        syntax_error(pos, "a representable integer");
    }
}

// ---------------------------------------------------------------------------
// Tokenizer
// ---------------------------------------------------------------------------

enum class Tok {
    Ident,
    Number,
    String,
    Placeholder, // <vector_N>
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    LParen,
    RParen,
    Comma,
    Dot,
    End,
};

struct Token {
    Tok type = Tok::End;
    std::string text;       // ident spelling or string contents (unescaped)
    std::int64_t value = 0; // Number / Placeholder index
    std::size_t pos = 0;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) { advance(); }

    const Token& peek() const { return current_; }

    Token take() {
        Token t = current_;
        advance();
        return t;
    }

private:
    void advance() {
        while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_])))
            ++i_;
        current_ = Token{};
        current_.pos = i_;
        if (i_ >= src_.size())
            return;
        const char c = src_[i_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = i_;
            while (i_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_'))
                ++i_;
            current_.type = Tok::Ident;
            current_.text = std::string(src_.substr(start, i_ - start));
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '-' && i_ + 1 < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[i_ + 1])))) {
            std::size_t start = i_;
            if (c == '-')
                ++i_;
            while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_])))
                ++i_;
            current_.type = Tok::Number;
            current_.value = digits_to_int(std::string(src_.substr(start, i_ - start)), start);
            return;
        }
        if (c == '\'') {
            ++i_;
            std::string out;
            while (true) {
                if (i_ >= src_.size())
                    syntax_error(current_.pos, "closing quote");
                if (src_[i_] == '\'') {
                    if (i_ + 1 < src_.size() && src_[i_ + 1] == '\'') {
                        out.push_back('\'');
                        i_ += 2;
                        continue;
                    }
                    ++i_;
                    break;
                }
                out.push_back(src_[i_++]);
            }
            current_.type = Tok::String;
            current_.text = std::move(out);
            return;
        }
        if (c == '<') {
            // <vector_N> placeholder, else < / <=
            if (src_.compare(i_ + 1, 7, "vector_") == 0) {
                std::size_t j = i_ + 8;
                std::size_t digits_start = j;
                while (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j])))
                    ++j;
                if (j > digits_start && j < src_.size() && src_[j] == '>') {
                    current_.type = Tok::Placeholder;
                    current_.value = digits_to_int(
                        std::string(src_.substr(digits_start, j - digits_start)), digits_start);
                    i_ = j + 1;
                    return;
                }
                syntax_error(current_.pos, "well-formed <vector_N> placeholder");
            }
            if (i_ + 1 < src_.size() && src_[i_ + 1] == '=') {
                current_.type = Tok::Le;
                i_ += 2;
            } else {
                current_.type = Tok::Lt;
                ++i_;
            }
            return;
        }
        switch (c) {
        case '=':
            current_.type = Tok::Eq;
            ++i_;
            return;
        case '!':
            if (i_ + 1 < src_.size() && src_[i_ + 1] == '=') {
                current_.type = Tok::Ne;
                i_ += 2;
                return;
            }
            syntax_error(i_, "'=' after '!'");
        case '>':
            if (i_ + 1 < src_.size() && src_[i_ + 1] == '=') {
                current_.type = Tok::Ge;
                i_ += 2;
            } else {
                current_.type = Tok::Gt;
                ++i_;
            }
            return;
        case '(':
            current_.type = Tok::LParen;
            ++i_;
            return;
        case ')':
            current_.type = Tok::RParen;
            ++i_;
            return;
        case ',':
            current_.type = Tok::Comma;
            ++i_;
            return;
        case '.':
            current_.type = Tok::Dot;
            ++i_;
            return;
        default:
            syntax_error(i_, "a token");
        }
    }

    std::string_view src_;
    std::size_t i_ = 0;
    Token current_;
};

std::string upper(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

bool is_keyword(const Token& t, const char* kw) {
    return t.type == Tok::Ident && upper(t.text) == kw;
}

// ---------------------------------------------------------------------------
// Recursive-descent parser
// ---------------------------------------------------------------------------

class SqlParser {
public:
    explicit SqlParser(std::string_view src) : lex_(src) {}

    SqlAst parse() {
        expect_keyword("SELECT");
        SqlAst ast;
        if (is_keyword(lex_.peek(), "DISTINCT")) {
            lex_.take();
            ast.distinct = true;
        }
        ast.projection = parse_projection();
        expect_keyword("FROM");
        Token table = expect(Tok::Ident, "table name 'email'");
        if (table.text != "email")
            syntax_error(table.pos, "table name 'email'");
        if (lex_.peek().type == Tok::Comma) {
            lex_.take();
            ast.json_each_field = parse_json_each_source();
        }
        if (is_keyword(lex_.peek(), "WHERE")) {
            lex_.take();
            ast.where = parse_or();
        }
        if (lex_.peek().type != Tok::End)
            syntax_error(lex_.peek().pos, "end of statement");
        validate(ast);
        return ast;
    }

private:
    Token expect(Tok type, const char* what) {
        if (lex_.peek().type != type)
            syntax_error(lex_.peek().pos, what);
        return lex_.take();
    }

    void expect_keyword(const char* kw) {
        if (!is_keyword(lex_.peek(), kw))
            syntax_error(lex_.peek().pos, std::string("keyword ") + kw);
        lex_.take();
    }

    Projection parse_projection() {
        if (is_keyword(lex_.peek(), "JSON_EXTRACT")) {
            ElementProjection proj;
            proj.path = parse_json_extract();
            if (is_keyword(lex_.peek(), "AS")) {
                lex_.take();
                proj.alias = expect(Tok::Ident, "projection alias").text;
            }
            return proj;
        }
        Token t = expect(Tok::Ident, "projection (message_id or json_extract)");
        if (t.text != "message_id")
            syntax_error(t.pos, "projection (message_id or json_extract)");
        return MessageIdProjection{};
    }

    std::string parse_json_each_source() {
        if (!is_keyword(lex_.peek(), "JSON_EACH"))
            syntax_error(lex_.peek().pos, "json_each(...) source");
        lex_.take();
        expect(Tok::LParen, "'('");
        Token table = expect(Tok::Ident, "'email'");
        if (table.text != "email")
            syntax_error(table.pos, "'email'");
        expect(Tok::Dot, "'.'");
        Token field = expect(Tok::Ident, "list field name");
        const FieldInfo* info = find_field(field.text);
        if (info == nullptr)
            throw ParseError(Kind::UnknownField, "unknown field '" + field.text + "'", field.pos);
        if (info->granularity != Granularity::Element)
            syntax_error(field.pos, "a list field (folder_labels or attachment_list)");
        expect(Tok::RParen, "')'");
        return field.text;
    }

    // json_extract(json_each.value, '$.path') -> path
    std::string parse_json_extract() {
        expect_keyword("JSON_EXTRACT");
        expect(Tok::LParen, "'('");
        Token cursor = expect(Tok::Ident, "'json_each'");
        if (upper(cursor.text) != "JSON_EACH")
            syntax_error(cursor.pos, "'json_each'");
        expect(Tok::Dot, "'.'");
        Token value = expect(Tok::Ident, "'value'");
        if (upper(value.text) != "VALUE")
            syntax_error(value.pos, "'value'");
        expect(Tok::Comma, "','");
        Token path = expect(Tok::String, "path string '$.field'");
        if (path.text.size() < 3 || path.text.compare(0, 2, "$.") != 0)
            syntax_error(path.pos, "path of the form '$.field'");
        expect(Tok::RParen, "')'");
        saw_json_extract_ = true;
        return path.text.substr(2);
    }

    Predicate parse_or() {
        std::vector<Predicate> terms;
        terms.push_back(parse_and());
        while (is_keyword(lex_.peek(), "OR")) {
            lex_.take();
            terms.push_back(parse_and());
        }
        if (terms.size() == 1)
            return std::move(terms.front());
        return Predicate{OrGroup{std::move(terms)}};
    }

    Predicate parse_and() {
        std::vector<Predicate> terms;
        terms.push_back(parse_unary());
        while (is_keyword(lex_.peek(), "AND")) {
            lex_.take();
            terms.push_back(parse_unary());
        }
        if (terms.size() == 1)
            return std::move(terms.front());
        return Predicate{AndGroup{std::move(terms)}};
    }

    Predicate parse_unary() {
        if (lex_.peek().type == Tok::LParen) {
            lex_.take();
            Predicate inner = parse_or();
            expect(Tok::RParen, "')'");
            return inner;
        }
        return parse_atom();
    }

    Predicate parse_atom() {
        // Bare TRUE/FALSE is a predicate unless followed by an operator.
        if (is_keyword(lex_.peek(), "TRUE") || is_keyword(lex_.peek(), "FALSE")) {
            Token t = lex_.take();
            const bool v = upper(t.text) == "TRUE";
            if (!next_is_operator())
                return Predicate{BoolConst{v}};
            return finish_atom(BoolLit{v});
        }
        return finish_atom(parse_operand());
    }

    bool next_is_operator() const {
        switch (lex_.peek().type) {
        case Tok::Eq:
        case Tok::Ne:
        case Tok::Lt:
        case Tok::Le:
        case Tok::Gt:
        case Tok::Ge:
            return true;
        default:
            return is_keyword(lex_.peek(), "IN");
        }
    }

    Predicate finish_atom(Operand lhs) {
        if (is_keyword(lex_.peek(), "IN")) {
            lex_.take();
            Token ph = expect(Tok::Placeholder, "<vector_N> placeholder");
            return Predicate{Membership{std::move(lhs), static_cast<std::size_t>(ph.value)}};
        }
        CompareOp op;
        switch (lex_.peek().type) {
        case Tok::Eq:
            op = CompareOp::Eq;
            break;
        case Tok::Ne:
            op = CompareOp::Ne;
            break;
        case Tok::Lt:
            op = CompareOp::Lt;
            break;
        case Tok::Le:
            op = CompareOp::Le;
            break;
        case Tok::Gt:
            op = CompareOp::Gt;
            break;
        case Tok::Ge:
            op = CompareOp::Ge;
            break;
        default:
            syntax_error(lex_.peek().pos, "comparison operator or IN");
        }
        lex_.take();
        Operand rhs = parse_operand();
        return Predicate{normalize_comparison({std::move(lhs), op, std::move(rhs)})};
    }

    Operand parse_operand() {
        const Token& t = lex_.peek();
        switch (t.type) {
        case Tok::Number:
            return IntLit{lex_.take().value};
        case Tok::String:
            return StringLit{lex_.take().text};
        case Tok::Ident:
            break;
        default:
            syntax_error(t.pos, "an operand");
        }
        if (is_keyword(t, "TRUE") || is_keyword(t, "FALSE"))
            return BoolLit{upper(lex_.take().text) == "TRUE"};
        if (is_keyword(t, "DATE"))
            return parse_relative_date();
        if (is_keyword(t, "JSON_EXTRACT"))
            return JsonPathRef{parse_json_extract()};
        Token ident = lex_.take();
        auto resolved = lookup_field_alias(ident.text);
        if (!resolved)
            throw ParseError(Kind::UnknownField, "unknown field '" + ident.text + "'", ident.pos);
        return FieldRef{*resolved};
    }

    Operand parse_relative_date() {
        expect_keyword("DATE");
        expect(Tok::LParen, "'('");
        Token now = expect(Tok::String, "'now'");
        if (now.text != "now")
            syntax_error(now.pos, "'now'");
        expect(Tok::Comma, "','");
        Token offset = expect(Tok::String, "offset string like '-7 day'");
        RelativeDate rel;
        if (!parse_day_offset(offset.text, rel.offset_days))
            syntax_error(offset.pos, "offset string like '-7 day'");
        expect(Tok::RParen, "')'");
        return rel;
    }

    static bool parse_day_offset(const std::string& s, std::int64_t& out) {
        std::size_t i = 0;
        bool neg = false;
        if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
            neg = s[i] == '-';
            ++i;
        }
        std::size_t digits = 0;
        std::int64_t v = 0;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
            v = v * 10 + (s[i] - '0');
            ++i;
            ++digits;
        }
        if (digits == 0)
            return false;
        std::string unit = s.substr(i);
        if (unit != " day" && unit != " days")
            return false;
        out = neg ? -v : v;
        return true;
    }

    // `bool_field = 1` and `bool_field = true` mean the same thing; the
    // AST keeps the boolean form.
    static Comparison normalize_comparison(Comparison cmp) {
        auto bool_field = [](const Operand& op) {
            const auto* ref = std::get_if<FieldRef>(&op);
            if (ref == nullptr)
                return false;
            const FieldInfo* info = find_field(ref->name);
            return info != nullptr && info->type == FieldType::Bool;
        };
        auto coerce = [](Operand& op) {
            if (const auto* lit = std::get_if<IntLit>(&op))
                if (lit->value == 0 || lit->value == 1)
                    op = BoolLit{lit->value == 1};
        };
        if (bool_field(cmp.lhs))
            coerce(cmp.rhs);
        if (bool_field(cmp.rhs))
            coerce(cmp.lhs);
        return cmp;
    }

    void validate(const SqlAst& ast) {
        if (!ast.json_each_field) {
            if (saw_json_extract_)
                throw ParseError(Kind::SqlSyntax,
                                 "json_extract requires a json_each(...) source", 0);
            if (std::holds_alternative<ElementProjection>(ast.projection))
                throw ParseError(Kind::SqlSyntax,
                                 "element projection requires a json_each(...) source", 0);
        }
    }

    Lexer lex_;
    bool saw_json_extract_ = false;
};

void collect_from_predicate(const Predicate& p, std::vector<std::size_t>& out) {
    if (const auto* m = std::get_if<Membership>(&p.node)) {
        out.push_back(m->placeholder);
    } else if (const auto* a = std::get_if<AndGroup>(&p.node)) {
        for (const auto& t : a->terms)
            collect_from_predicate(t, out);
    } else if (const auto* o = std::get_if<OrGroup>(&p.node)) {
        for (const auto& t : o->terms)
            collect_from_predicate(t, out);
    }
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

std::string quote_sql(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += "''";
        else
            out.push_back(c);
    }
    out.push_back('\'');
    return out;
}

std::string render_operand(const Operand& op) {
    struct Visitor {
        std::string operator()(const FieldRef& f) const { return f.name; }
        std::string operator()(const JsonPathRef& j) const {
            return "json_extract(json_each.value, '$." + j.path + "')";
        }
        std::string operator()(const StringLit& s) const { return quote_sql(s.value); }
        std::string operator()(const IntLit& i) const { return std::to_string(i.value); }
        std::string operator()(const BoolLit& b) const { return b.value ? "1" : "0"; }
        std::string operator()(const RelativeDate& r) const {
            std::string sign = r.offset_days < 0 ? "-" : "+";
            std::int64_t mag = r.offset_days < 0 ? -r.offset_days : r.offset_days;
            return "date('now', '" + sign + std::to_string(mag) + " day')";
        }
    };
    return std::visit(Visitor{}, op);
}

const char* op_text(CompareOp op) {
    switch (op) {
    case CompareOp::Eq:
        return "=";
    case CompareOp::Ne:
        return "!=";
    case CompareOp::Lt:
        return "<";
    case CompareOp::Le:
        return "<=";
    case CompareOp::Gt:
        return ">";
    case CompareOp::Ge:
        return ">=";
    }
    return "=";
}

enum class ParentCtx { Top, And, Or };

std::string render_predicate(const Predicate& p, ParentCtx ctx) {
    struct Visitor {
        ParentCtx ctx;
        std::string operator()(const Comparison& c) const {
            return render_operand(c.lhs) + " " + op_text(c.op) + " " + render_operand(c.rhs);
        }
        std::string operator()(const Membership& m) const {
            return render_operand(m.expr) + " IN <vector_" + std::to_string(m.placeholder) + ">";
        }
        std::string operator()(const BoolConst& b) const { return b.value ? "TRUE" : "FALSE"; }
        std::string operator()(const AndGroup& g) const {
            std::string out;
            for (std::size_t i = 0; i < g.terms.size(); ++i) {
                if (i > 0)
                    out += " AND ";
                out += render_predicate(g.terms[i], ParentCtx::And);
            }
            // Nested same-type groups keep their parens so structure
            // survives the round trip.
            if (ctx == ParentCtx::And)
                return "(" + out + ")";
            return out;
        }
        std::string operator()(const OrGroup& g) const {
            std::string out;
            for (std::size_t i = 0; i < g.terms.size(); ++i) {
                if (i > 0)
                    out += " OR ";
                out += render_predicate(g.terms[i], ParentCtx::Or);
            }
            if (ctx == ParentCtx::And || ctx == ParentCtx::Or)
                return "(" + out + ")";
            return out;
        }
    };
    return std::visit(Visitor{ctx}, p.node);
}

void validate_arity(const DslProgram& program) {
    std::vector<std::size_t> used = collect_placeholders(program.sql);
    std::vector<bool> referenced(program.vector_query_list.size(), false);
    for (std::size_t k : used) {
        if (k >= program.vector_query_list.size())
            throw ParseError(Kind::PlaceholderOutOfRange,
                             "placeholder <vector_" + std::to_string(k) +
                                 "> exceeds vector_query_list of size " +
                                 std::to_string(program.vector_query_list.size()));
        referenced[k] = true;
    }
    for (std::size_t i = 0; i < referenced.size(); ++i)
        if (!referenced[i])
            throw ParseError(Kind::DanglingVectorQuery,
                             "vector_query_list entry " + std::to_string(i) +
                                 " is never referenced by a placeholder");
}

} // namespace

std::vector<std::size_t> collect_placeholders(const SqlAst& sql) {
    std::vector<std::size_t> out;
    if (sql.where)
        collect_from_predicate(*sql.where, out);
    return out;
}

std::string extract_tagged_query(std::string_view output) {
    static constexpr std::string_view kOpen = "<query>";
    static constexpr std::string_view kClose = "</query>";
    std::size_t first = output.find(kOpen);
    if (first == std::string_view::npos)
        throw ParseError(Kind::NoTag, "no <query> tag found");
    if (output.find(kOpen, first + kOpen.size()) != std::string_view::npos)
        throw ParseError(Kind::MultipleTags, "more than one <query> tag");
    std::size_t close = output.find(kClose, first + kOpen.size());
    if (close == std::string_view::npos)
        throw ParseError(Kind::UnterminatedTag, "<query> tag is never closed");
    return std::string(output.substr(first + kOpen.size(), close - first - kOpen.size()));
}

SqlAst parse_sql(std::string_view sql) {
    return SqlParser(sql).parse();
}

DslProgram parse_program(std::string_view text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw ParseError(Kind::JsonMalformed, "program is not a JSON object");
    auto sql_it = j.find("sql");
    if (sql_it == j.end() || !sql_it->is_string())
        throw ParseError(Kind::JsonMalformed, "missing or non-string 'sql' key");
    auto vq_it = j.find("vector_query_list");
    if (vq_it == j.end() || !vq_it->is_array())
        throw ParseError(Kind::JsonMalformed, "missing or non-array 'vector_query_list' key");

    DslProgram program;
    program.sql = parse_sql(sql_it->get<std::string>());
    for (const auto& entry : *vq_it) {
        if (!entry.is_object() || entry.size() != 1)
            throw ParseError(Kind::JsonMalformed,
                             "vector_query_list entries must be single-key objects");
        const auto& item = entry.items().begin();
        if (!item.value().is_string() || item.value().get<std::string>().empty())
            throw ParseError(Kind::JsonMalformed, "vector query text must be a nonempty string");
        auto resolved = lookup_field_alias(item.key());
        if (!resolved)
            throw ParseError(Kind::UnknownField, "unknown vector query field '" + item.key() + "'");
        program.vector_query_list.push_back({*resolved, item.value().get<std::string>()});
    }
    validate_arity(program);
    return program;
}

std::string render_sql(const SqlAst& sql) {
    std::string out = "SELECT ";
    if (sql.distinct)
        out += "DISTINCT ";
    if (const auto* proj = std::get_if<ElementProjection>(&sql.projection)) {
        out += "json_extract(json_each.value, '$." + proj->path + "')";
        if (!proj->alias.empty())
            out += " AS " + proj->alias;
    } else {
        out += "message_id";
    }
    out += " FROM email";
    if (sql.json_each_field)
        out += ", json_each(email." + *sql.json_each_field + ")";
    if (sql.where)
        out += " WHERE " + render_predicate(*sql.where, ParentCtx::Top);
    return out;
}

std::string render_program(const DslProgram& program) {
    nlohmann::json j;
    j["sql"] = render_sql(program.sql);
    j["vector_query_list"] = nlohmann::json::array();
    for (const auto& q : program.vector_query_list)
        j["vector_query_list"].push_back({{q.field, q.text}});
    return j.dump();
}

} // namespace dslq
