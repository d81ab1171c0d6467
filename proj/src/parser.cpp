#include "dpsql/parser.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace dpsql {

namespace {

struct Token {
    enum Kind { Keyword, Ident, Number, String, Op, Punct, End } kind = End;
    std::string text;  // keywords/idents lowercased
    size_t pos = 0;
};

const std::set<std::string> kKeywords = {
    "select", "from",  "where",  "group",  "by",     "join",   "inner", "on",    "as",
    "and",    "or",    "count",  "sum",    "avg",    "min",    "max",   "distinct",
    "having", "union", "intersect", "except", "order", "limit", "not",  "in",
    "between", "like", "exists", "left",   "right",  "full",   "outer", "cross", "over",
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) {
        size_t i = 0;
        while (i < src_.size()) {
            char c = src_[i];
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++i;
                continue;
            }
            if (c == '-' && i + 1 < src_.size() && src_[i + 1] == '-') {
                while (i < src_.size() && src_[i] != '\n') ++i;
                continue;
            }
            size_t start = i;
            if (c == '\'') {
                std::string s;
                ++i;
                while (i < src_.size() && src_[i] != '\'') s += src_[i++];
                if (i >= src_.size()) throw SyntaxError(start, "'", "unterminated string literal");
                ++i;
                tokens_.push_back({Token::String, s, start});
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) ||
                (c == '.' && i + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i + 1])))) {
                std::string s;
                while (i < src_.size() &&
                       (std::isdigit(static_cast<unsigned char>(src_[i])) || src_[i] == '.' ||
                        src_[i] == 'e' || src_[i] == 'E' ||
                        ((src_[i] == '+' || src_[i] == '-') && i > start &&
                         (src_[i - 1] == 'e' || src_[i - 1] == 'E')))) {
                    s += src_[i++];
                }
                tokens_.push_back({Token::Number, s, start});
                continue;
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::string s;
                while (i < src_.size() &&
                       (std::isalnum(static_cast<unsigned char>(src_[i])) || src_[i] == '_')) {
                    s += static_cast<char>(std::tolower(static_cast<unsigned char>(src_[i])));
                    ++i;
                }
                tokens_.push_back({kKeywords.count(s) ? Token::Keyword : Token::Ident, s, start});
                continue;
            }
            if (c == '<' || c == '>' || c == '=' || c == '!') {
                std::string s(1, c);
                ++i;
                if (i < src_.size() && (src_[i] == '=' || (c == '<' && src_[i] == '>'))) {
                    s += src_[i++];
                }
                tokens_.push_back({Token::Op, s, start});
                continue;
            }
            if (c == ',' || c == '(' || c == ')' || c == '.' || c == '*' || c == ';') {
                tokens_.push_back({Token::Punct, std::string(1, c), start});
                ++i;
                continue;
            }
            throw SyntaxError(start, std::string(1, c), "unexpected character");
        }
        tokens_.push_back({Token::End, "<end>", src_.size()});
    }

    const Token& peek(size_t ahead = 0) const {
        size_t i = std::min(pos_ + ahead, tokens_.size() - 1);
        return tokens_[i];
    }

    Token take() { return tokens_[std::min(pos_++, tokens_.size() - 1)]; }

    bool accept_kw(const std::string& kw) {
        if (peek().kind == Token::Keyword && peek().text == kw) {
            ++pos_;
            return true;
        }
        return false;
    }

    bool accept_punct(const std::string& p) {
        if (peek().kind == Token::Punct && peek().text == p) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect_kw(const std::string& kw) {
        if (!accept_kw(kw)) fail("expected " + upper(kw));
    }

    void expect_punct(const std::string& p) {
        if (!accept_punct(p)) fail("expected '" + p + "'");
    }

    std::string expect_ident(const std::string& what) {
        if (peek().kind != Token::Ident) fail("expected " + what);
        return take().text;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw SyntaxError(peek().pos, peek().text, msg);
    }

    static std::string upper(std::string s) {
        std::transform(s.begin(), s.end(), s.begin(),
                       [](unsigned char c) { return std::toupper(c); });
        return s;
    }

private:
    const std::string& src_;
    std::vector<Token> tokens_;
    size_t pos_ = 0;
};

class Parser {
public:
    explicit Parser(const std::string& sql) : lx_(sql) {}

    QueryAst run() {
        lx_.expect_kw("select");
        parse_select_list();
        lx_.expect_kw("from");
        parse_from();
        if (lx_.accept_kw("where")) ast_.where = parse_predicate();
        if (lx_.accept_kw("group")) {
            lx_.expect_kw("by");
            do {
                ast_.group_by.push_back(parse_column_ref());
            } while (lx_.accept_punct(","));
        }
        reject_trailing();
        check_shape();
        return std::move(ast_);
    }

private:
    void unsupported(const std::string& feature, const std::string& msg) {
        throw UnsupportedFeature(feature, "unsupported SQL: " + msg);
    }

    ColumnRef parse_column_ref() {
        ColumnRef c;
        c.column = lx_.expect_ident("column name");
        if (lx_.accept_punct(".")) {
            c.qualifier = c.column;
            c.column = lx_.expect_ident("column name");
        }
        return c;
    }

    bool at_aggregate_kw() {
        const Token& t = lx_.peek();
        return t.kind == Token::Keyword &&
               (t.text == "count" || t.text == "sum" || t.text == "avg" || t.text == "min" ||
                t.text == "max");
    }

    AggregateCall parse_aggregate() {
        std::string fn = lx_.take().text;
        lx_.expect_punct("(");
        AggregateCall a;
        if (fn == "count") {
            if (lx_.accept_punct("*")) {
                a.func = AggFunc::Count;
            } else if (lx_.accept_kw("distinct")) {
                a.func = AggFunc::CountDistinct;
                a.argument = parse_column_ref();
            } else {
                a.func = AggFunc::Count;
                a.argument = parse_column_ref();
            }
        } else {
            if (lx_.accept_kw("distinct")) unsupported("distinct-aggregate", "DISTINCT is only supported inside COUNT");
            if (fn == "sum") a.func = AggFunc::Sum;
            else if (fn == "avg") a.func = AggFunc::Avg;
            else if (fn == "min") a.func = AggFunc::Min;
            else a.func = AggFunc::Max;
            a.argument = parse_column_ref();
        }
        lx_.expect_punct(")");
        return a;
    }

    void parse_select_list() {
        do {
            if (lx_.peek().kind == Token::Punct && lx_.peek().text == "*")
                unsupported("select-star", "SELECT * is not supported; project explicit columns");
            if (lx_.accept_kw("distinct"))
                unsupported("select-distinct", "SELECT DISTINCT is not supported");
            Projection p;
            if (at_aggregate_kw()) {
                p.expr = parse_aggregate();
            } else if (lx_.peek().kind == Token::Punct && lx_.peek().text == "(") {
                maybe_subquery_paren();
                lx_.fail("unexpected '(' in select list");
            } else {
                p.expr = parse_column_ref();
            }
            if (lx_.accept_kw("as")) p.alias = lx_.expect_ident("alias");
            ast_.projections.push_back(std::move(p));
        } while (lx_.accept_punct(","));
    }

    void maybe_subquery_paren() {
        if (lx_.peek(1).kind == Token::Keyword && lx_.peek(1).text == "select")
            unsupported("subquery", "subqueries are not supported");
    }

    TableRef parse_table_ref() {
        if (lx_.peek().kind == Token::Punct && lx_.peek().text == "(") {
            maybe_subquery_paren();
            lx_.fail("expected table name");
        }
        TableRef t;
        t.table = lx_.expect_ident("table name");
        if (lx_.accept_kw("as")) {
            t.alias = lx_.expect_ident("alias");
        } else if (lx_.peek().kind == Token::Ident) {
            t.alias = lx_.take().text;
        } else {
            t.alias = t.table;
        }
        return t;
    }

    void parse_from() {
        ast_.from.push_back(parse_table_ref());
        while (true) {
            if (lx_.accept_punct(",")) {
                ast_.from.push_back(parse_table_ref());
                continue;
            }
            const Token& t = lx_.peek();
            if (t.kind == Token::Keyword &&
                (t.text == "left" || t.text == "right" || t.text == "full" || t.text == "outer" ||
                 t.text == "cross")) {
                unsupported("outer-join", "only inner equi-joins are supported");
            }
            bool inner = false;
            if (t.kind == Token::Keyword && t.text == "inner") {
                lx_.take();
                inner = true;
            }
            if (lx_.accept_kw("join")) {
                ast_.from.push_back(parse_table_ref());
                int table_idx = static_cast<int>(ast_.from.size()) - 1;
                lx_.expect_kw("on");
                do {
                    JoinSpec j;
                    j.left = parse_column_ref();
                    if (lx_.peek().kind != Token::Op || lx_.peek().text != "=")
                        unsupported("non-equi-join", "ON condition must be an equality");
                    lx_.take();
                    j.right = parse_column_ref();
                    j.on_table = table_idx;
                    ast_.joins.push_back(std::move(j));
                } while (lx_.accept_kw("and"));
                continue;
            }
            if (inner) lx_.fail("expected JOIN");
            break;
        }
    }

    Operand parse_operand() {
        const Token& t = lx_.peek();
        if (t.kind == Token::Number) {
            std::string s = lx_.take().text;
            bool real = s.find('.') != std::string::npos || s.find('e') != std::string::npos ||
                        s.find('E') != std::string::npos;
            return real ? Value::from_real(std::stod(s)) : parse_value(Dtype::Int, s);
        }
        if (t.kind == Token::String) return Value::from_text(lx_.take().text);
        if (t.kind == Token::Ident) return parse_column_ref();
        if (t.kind == Token::Punct && t.text == "(") maybe_subquery_paren();
        lx_.fail("expected column or literal");
    }

    Predicate parse_comparison() {
        Operand lhs = parse_operand();
        const Token& t = lx_.peek();
        if (t.kind == Token::Keyword && (t.text == "in" || t.text == "between" || t.text == "like" ||
                                         t.text == "exists" || t.text == "not")) {
            // IN over a subquery is the more useful diagnosis
            if (t.text == "in" && lx_.peek(1).kind == Token::Punct && lx_.peek(1).text == "(" &&
                lx_.peek(2).kind == Token::Keyword && lx_.peek(2).text == "select") {
                unsupported("subquery", "subqueries are not supported");
            }
            unsupported(t.text, Lexer::upper(t.text) + " predicates are not supported");
        }
        if (t.kind != Token::Op) lx_.fail("expected comparison operator");
        std::string op = lx_.take().text;
        Predicate p;
        p.kind = Predicate::Kind::Cmp;
        p.cmp.lhs = std::move(lhs);
        if (op == "=") p.cmp.op = CmpOp::Eq;
        else if (op == "<>" || op == "!=") p.cmp.op = CmpOp::Ne;
        else if (op == "<") p.cmp.op = CmpOp::Lt;
        else if (op == "<=") p.cmp.op = CmpOp::Le;
        else if (op == ">") p.cmp.op = CmpOp::Gt;
        else if (op == ">=") p.cmp.op = CmpOp::Ge;
        else lx_.fail("unknown operator " + op);
        p.cmp.rhs = parse_operand();
        return p;
    }

    Predicate parse_primary() {
        if (lx_.peek().kind == Token::Keyword && lx_.peek().text == "not")
            unsupported("not", "NOT is not supported");
        if (lx_.peek().kind == Token::Punct && lx_.peek().text == "(") {
            maybe_subquery_paren();
            lx_.take();
            Predicate p = parse_predicate();
            lx_.expect_punct(")");
            return p;
        }
        return parse_comparison();
    }

    Predicate parse_and() {
        Predicate first = parse_primary();
        if (!(lx_.peek().kind == Token::Keyword && lx_.peek().text == "and")) return first;
        Predicate p;
        p.kind = Predicate::Kind::And;
        p.children.push_back(std::move(first));
        while (lx_.accept_kw("and")) p.children.push_back(parse_primary());
        return p;
    }

    Predicate parse_predicate() {
        Predicate first = parse_and();
        if (!(lx_.peek().kind == Token::Keyword && lx_.peek().text == "or")) return first;
        Predicate p;
        p.kind = Predicate::Kind::Or;
        p.children.push_back(std::move(first));
        while (lx_.accept_kw("or")) p.children.push_back(parse_and());
        return p;
    }

    void reject_trailing() {
        lx_.accept_punct(";");
        const Token& t = lx_.peek();
        if (t.kind == Token::End) return;
        if (t.kind == Token::Keyword) {
            if (t.text == "having") unsupported("having", "HAVING is not supported");
            if (t.text == "union" || t.text == "intersect" || t.text == "except")
                unsupported("set-operation", "set operations are not supported");
            if (t.text == "order") unsupported("order-by", "ORDER BY is not supported");
            if (t.text == "limit") unsupported("limit", "LIMIT is not supported");
            if (t.text == "over") unsupported("window-function", "window functions are not supported");
        }
        lx_.fail("unexpected trailing input");
    }

    // Structural AST invariants that need no catalog.
    void check_shape() {
        size_t aggs = 0;
        for (const auto& p : ast_.projections) {
            if (p.is_aggregate()) ++aggs;
        }
        if (aggs > 1)
            unsupported("multiple-aggregates", "queries with multiple aggregation functions are not supported");

        auto loose_eq = [](const ColumnRef& a, const ColumnRef& b) {
            if (a.column != b.column) return false;
            return a.qualifier.empty() || b.qualifier.empty() || a.qualifier == b.qualifier;
        };

        for (const auto& g : ast_.group_by) {
            bool found = false;
            for (const auto& p : ast_.projections) {
                if (!p.is_aggregate() && loose_eq(std::get<ColumnRef>(p.expr), g)) found = true;
            }
            if (!found)
                throw SyntaxError(0, g.column, "GROUP BY column " + g.column + " must be projected");
        }
        if (aggs > 0) {
            for (const auto& p : ast_.projections) {
                if (p.is_aggregate()) continue;
                const ColumnRef& c = std::get<ColumnRef>(p.expr);
                bool grouped = false;
                for (const auto& g : ast_.group_by) {
                    if (loose_eq(c, g)) grouped = true;
                }
                if (!grouped)
                    throw SyntaxError(0, c.column,
                                      "column " + c.column + " must appear in GROUP BY");
            }
        }
    }

    Lexer lx_;
    QueryAst ast_;
};

} // namespace

QueryAst parse(const std::string& sql_text) { return Parser(sql_text).run(); }

} // namespace dpsql
