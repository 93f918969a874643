#include "castle/sql.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>

#include "castle/error.hpp"

namespace castle::sql {

namespace {

std::string to_upper(std::string_view s) {
    std::string r(s);
    std::transform(r.begin(), r.end(), r.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return r;
}

std::string to_lower(std::string_view s) {
    std::string r(s);
    std::transform(r.begin(), r.end(), r.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return r;
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

enum class Tok { End, Ident, String, Number, Punct, Dollar };

struct Token {
    Tok kind = Tok::End;
    std::string text;   // ident name (folded), punct symbol, string value, number lexeme
    bool quoted = false; // quoted identifier
    bool is_int = false;
    int64_t int_value = 0;
    double num_value = 0;
    int line = 1;
    int col = 1;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) { next(); }

    const Token& peek() const { return cur_; }
    Token take() {
        Token t = cur_;
        next();
        return t;
    }

    [[noreturn]] void fail(const std::string& msg, const Token& at) const {
        throw Error::parse("syntax error at line " + std::to_string(at.line) + ", column " +
                           std::to_string(at.col) + ": " + msg);
    }

private:
    void next() {
        skip_ws();
        cur_ = Token{};
        cur_.line = line_;
        cur_.col = col_;
        if (pos_ >= src_.size()) {
            cur_.kind = Tok::End;
            return;
        }
        char c = src_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                advance();
            cur_.kind = Tok::Ident;
            cur_.text = to_lower(std::string_view(src_).substr(start, pos_ - start));
            return;
        }
        if (c == '"') {
            advance();
            std::string out;
            while (pos_ < src_.size() && src_[pos_] != '"') {
                out.push_back(src_[pos_]);
                advance();
            }
            if (pos_ >= src_.size())
                fail("unterminated quoted identifier", cur_);
            advance();
            cur_.kind = Tok::Ident;
            cur_.quoted = true;
            cur_.text = out;
            return;
        }
        if (c == '\'') {
            advance();
            std::string out;
            while (pos_ < src_.size()) {
                if (src_[pos_] == '\'') {
                    if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '\'') {
                        out.push_back('\'');
                        advance();
                        advance();
                        continue;
                    }
                    break;
                }
                out.push_back(src_[pos_]);
                advance();
            }
            if (pos_ >= src_.size())
                fail("unterminated string literal", cur_);
            advance();
            cur_.kind = Tok::String;
            cur_.text = out;
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t start = pos_;
            bool is_float = false;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                advance();
            if (pos_ + 1 < src_.size() && src_[pos_] == '.' &&
                std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
                is_float = true;
                advance();
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                    advance();
            }
            cur_.kind = Tok::Number;
            cur_.text = src_.substr(start, pos_ - start);
            if (is_float) {
                cur_.num_value = std::strtod(cur_.text.c_str(), nullptr);
            } else {
                auto [p, ec] = std::from_chars(cur_.text.data(), cur_.text.data() + cur_.text.size(),
                                               cur_.int_value);
                if (ec == std::errc()) {
                    cur_.is_int = true;
                    cur_.num_value = static_cast<double>(cur_.int_value);
                } else {
                    cur_.num_value = std::strtod(cur_.text.c_str(), nullptr);
                }
            }
            return;
        }
        if (c == '$' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '$') {
            advance();
            advance();
            size_t start = pos_;
            size_t end = src_.find("$$", pos_);
            if (end == std::string::npos)
                fail("unterminated $$ body", cur_);
            cur_.kind = Tok::Dollar;
            cur_.text = src_.substr(start, end - start);
            while (pos_ < end + 2)
                advance();
            return;
        }
        // punctuation, longest match first
        static const char* two[] = {"<>", "!=", "<=", ">=", "::"};
        for (const char* t : two) {
            if (src_.compare(pos_, 2, t) == 0) {
                cur_.kind = Tok::Punct;
                cur_.text = t;
                advance();
                advance();
                return;
            }
        }
        static const std::string singles = "(),;.=<>+-*/?%";
        if (singles.find(c) != std::string::npos) {
            cur_.kind = Tok::Punct;
            cur_.text = std::string(1, c);
            advance();
            return;
        }
        fail(std::string("unexpected character '") + c + "'", cur_);
    }

    void skip_ws() {
        for (;;) {
            while (pos_ < src_.size() &&
                   std::isspace(static_cast<unsigned char>(src_[pos_])))
                advance();
            if (pos_ + 1 < src_.size() && src_[pos_] == '-' && src_[pos_ + 1] == '-') {
                while (pos_ < src_.size() && src_[pos_] != '\n')
                    advance();
                continue;
            }
            if (pos_ + 1 < src_.size() && src_[pos_] == '/' && src_[pos_ + 1] == '*') {
                size_t end = src_.find("*/", pos_ + 2);
                if (end == std::string::npos) {
                    pos_ = src_.size();
                    return;
                }
                while (pos_ < end + 2)
                    advance();
                continue;
            }
            return;
        }
    }

    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    const std::string& src_;
    size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    Token cur_;
};

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

class Parser {
public:
    explicit Parser(const std::string& text) : lex_(text) {}

    std::vector<Statement> script() {
        std::vector<Statement> out;
        while (lex_.peek().kind != Tok::End) {
            if (accept_punct(";"))
                continue;
            out.push_back(statement());
            if (lex_.peek().kind != Tok::End)
                expect_punct(";");
        }
        return out;
    }

    SelectStmt select_only() {
        SelectStmt s = select_stmt();
        accept_punct(";");
        if (lex_.peek().kind != Tok::End)
            lex_.fail("trailing input after SELECT", lex_.peek());
        return s;
    }

    ExprPtr expr_only() {
        ExprPtr e = expr();
        if (lex_.peek().kind != Tok::End)
            lex_.fail("trailing input after expression", lex_.peek());
        return e;
    }

private:
    Lexer lex_;

    bool peek_kw(const char* kw) const {
        const Token& t = lex_.peek();
        return t.kind == Tok::Ident && !t.quoted && t.text == kw;
    }

    bool accept_kw(const char* kw) {
        if (peek_kw(kw)) {
            lex_.take();
            return true;
        }
        return false;
    }

    void expect_kw(const char* kw) {
        if (!accept_kw(kw))
            lex_.fail(std::string("expected ") + to_upper(kw), lex_.peek());
    }

    bool peek_punct(const char* p) const {
        const Token& t = lex_.peek();
        return t.kind == Tok::Punct && t.text == p;
    }

    bool accept_punct(const char* p) {
        if (peek_punct(p)) {
            lex_.take();
            return true;
        }
        return false;
    }

    void expect_punct(const char* p) {
        if (!accept_punct(p))
            lex_.fail(std::string("expected '") + p + "'", lex_.peek());
    }

    Token expect_ident(const char* what) {
        if (lex_.peek().kind != Tok::Ident)
            lex_.fail(std::string("expected ") + what, lex_.peek());
        return lex_.take();
    }

    int64_t expect_int(const char* what) {
        const Token& t = lex_.peek();
        if (t.kind != Tok::Number || !t.is_int)
            lex_.fail(std::string("expected ") + what, lex_.peek());
        return lex_.take().int_value;
    }

    Statement statement() {
        const Token& t = lex_.peek();
        if (t.kind != Tok::Ident)
            lex_.fail("expected a statement", t);
        if (t.text == "select")
            return Statement{select_stmt()};
        if (t.text == "update")
            return Statement{update_stmt()};
        if (t.text == "insert")
            return Statement{insert_stmt()};
        if (t.text == "delete")
            return Statement{delete_stmt()};
        if (t.text == "create")
            return create_stmt();
        if (t.text == "drop")
            return drop_stmt();
        if (t.text == "begin") {
            lex_.take();
            return Statement{TxnStmt{TxnStmt::Kind::Begin}};
        }
        if (t.text == "commit") {
            lex_.take();
            return Statement{TxnStmt{TxnStmt::Kind::Commit}};
        }
        if (t.text == "rollback") {
            lex_.take();
            return Statement{TxnStmt{TxnStmt::Kind::Rollback}};
        }
        lex_.fail("unsupported statement: " + to_upper(t.text), t);
    }

    // ----- SELECT -----

    SelectStmt select_stmt() {
        expect_kw("select");
        SelectStmt s;
        if (peek_kw("top")) {
            lex_.take();
            s.limit = expect_int("TOP bound");
            s.limit_surface = LimitForm::Top;
        }
        for (;;) {
            SelectStmt::Item item;
            item.expr = expr();
            if (accept_kw("as"))
                item.alias = expect_ident("alias").text;
            s.items.push_back(std::move(item));
            if (!accept_punct(","))
                break;
        }
        if (accept_kw("from")) {
            s.has_from = true;
            if (accept_punct("(")) {
                auto inner = std::make_shared<SelectStmt>(select_stmt());
                expect_punct(")");
                accept_kw("as");
                s.from_select = inner;
                s.from_alias = expect_ident("derived table alias").text;
            } else {
                Token name = expect_ident("table name");
                std::string table = name.quoted ? name.text : name.text;
                if (accept_punct(".")) {
                    Token part = expect_ident("table name");
                    table += "." + part.text;
                }
                s.from_table = table;
                if (accept_kw("as")) {
                    s.from_alias = expect_ident("table alias").text;
                } else if (lex_.peek().kind == Tok::Ident && !is_clause_keyword(lex_.peek().text)) {
                    s.from_alias = lex_.take().text;
                }
            }
        }
        if (accept_kw("where"))
            s.where = expr();
        if (accept_kw("group")) {
            expect_kw("by");
            for (;;) {
                s.group_by.push_back(expr());
                if (!accept_punct(","))
                    break;
            }
        }
        if (accept_kw("order")) {
            expect_kw("by");
            for (;;) {
                SelectStmt::OrderItem oi;
                oi.expr = expr();
                if (accept_kw("desc"))
                    oi.asc = false;
                else
                    accept_kw("asc");
                s.order_by.push_back(std::move(oi));
                if (!accept_punct(","))
                    break;
            }
        }
        if (accept_kw("limit")) {
            s.limit = expect_int("LIMIT bound");
            s.limit_surface = LimitForm::Limit;
        }
        return s;
    }

    static bool is_clause_keyword(const std::string& w) {
        static const char* kws[] = {"where", "group", "order", "limit", "on",    "as",
                                    "set",   "from",  "inner", "left",  "right", "join",
                                    "union", "having"};
        for (const char* k : kws)
            if (w == k)
                return true;
        return false;
    }

    // ----- UPDATE -----

    UpdateStmt update_stmt() {
        expect_kw("update");
        UpdateStmt u;
        u.table = expect_ident("table name").text;
        expect_kw("set");
        for (;;) {
            UpdateStmt::SetItem item;
            Token col = expect_ident("column name");
            item.column = col.text;
            item.quoted = col.quoted;
            expect_punct("=");
            item.value = expr();
            u.sets.push_back(std::move(item));
            if (!accept_punct(","))
                break;
        }
        if (accept_kw("where"))
            u.where = expr();
        return u;
    }

    DeleteStmt delete_stmt() {
        expect_kw("delete");
        expect_kw("from");
        DeleteStmt d;
        d.table = expect_ident("table name").text;
        if (accept_kw("where"))
            d.where = expr();
        return d;
    }

    // ----- INSERT -----

    InsertStmt insert_stmt() {
        expect_kw("insert");
        expect_kw("into");
        InsertStmt ins;
        ins.table = expect_ident("table name").text;
        if (accept_punct("(")) {
            for (;;) {
                ins.columns.push_back(expect_ident("column name").text);
                if (!accept_punct(","))
                    break;
            }
            expect_punct(")");
        }
        expect_kw("values");
        for (;;) {
            expect_punct("(");
            std::vector<ExprPtr> row;
            for (;;) {
                row.push_back(expr());
                if (!accept_punct(","))
                    break;
            }
            expect_punct(")");
            ins.rows.push_back(std::move(row));
            if (!accept_punct(","))
                break;
        }
        return ins;
    }

    // ----- CREATE -----

    Statement create_stmt() {
        expect_kw("create");
        bool or_replace = false;
        if (accept_kw("or")) {
            expect_kw("replace");
            or_replace = true;
        }
        if (accept_kw("table"))
            return Statement{create_table(or_replace)};
        if (accept_kw("function"))
            return Statement{create_function(or_replace)};
        if (accept_kw("trigger"))
            return Statement{create_trigger()};
        lex_.fail("expected TABLE, FUNCTION or TRIGGER after CREATE", lex_.peek());
    }

    CreateTableStmt create_table(bool or_replace) {
        if (or_replace)
            lex_.fail("OR REPLACE is not valid for CREATE TABLE", lex_.peek());
        CreateTableStmt ct;
        if (accept_kw("if")) {
            expect_kw("not");
            expect_kw("exists");
            ct.if_not_exists = true;
        }
        ct.name = expect_ident("table name").text;
        expect_punct("(");
        for (;;) {
            if (peek_kw("primary")) {
                lex_.take();
                expect_kw("key");
                expect_punct("(");
                for (;;) {
                    ct.primary_key.push_back(expect_ident("key column").text);
                    if (!accept_punct(","))
                        break;
                }
                expect_punct(")");
            } else {
                ct.columns.push_back(column_def());
            }
            if (!accept_punct(","))
                break;
        }
        expect_punct(")");
        for (const auto& c : ct.columns) {
            if (c.inline_pk) {
                if (!ct.primary_key.empty())
                    lex_.fail("multiple PRIMARY KEY clauses", lex_.peek());
                ct.primary_key.push_back(c.name);
            }
        }
        return ct;
    }

    ColumnDefAst column_def() {
        ColumnDefAst col;
        col.name = expect_ident("column name").text;
        Token ty = expect_ident("column type");
        std::string t = to_upper(ty.text);
        if (t == "SERIAL" || t == "TEXT" || t == "JSONB" || t == "INTEGER" || t == "NUMERIC" ||
            t == "VARCHAR" || t == "DECIMAL") {
            col.type_name = t;
        } else {
            lex_.fail("unsupported column type " + t, ty);
        }
        if (t == "VARCHAR") {
            expect_punct("(");
            col.length = static_cast<int>(expect_int("length"));
            expect_punct(")");
        } else if (t == "DECIMAL") {
            expect_punct("(");
            col.precision = static_cast<int>(expect_int("precision"));
            expect_punct(",");
            col.scale = static_cast<int>(expect_int("scale"));
            expect_punct(")");
        } else if (t == "NUMERIC" && accept_punct("(")) {
            col.precision = static_cast<int>(expect_int("precision"));
            if (accept_punct(","))
                col.scale = static_cast<int>(expect_int("scale"));
            expect_punct(")");
        }
        for (;;) {
            if (accept_kw("primary")) {
                expect_kw("key");
                col.inline_pk = true;
            } else if (accept_kw("not")) {
                expect_kw("null");
                col.not_null = true;
            } else {
                break;
            }
        }
        return col;
    }

    CreateFunctionStmt create_function(bool or_replace) {
        CreateFunctionStmt fn;
        fn.or_replace = or_replace;
        fn.name = expect_ident("function name").text;
        expect_punct("(");
        expect_punct(")");
        expect_kw("returns");
        expect_kw("trigger");
        expect_kw("as");
        if (lex_.peek().kind != Tok::Dollar)
            lex_.fail("expected $$ function body", lex_.peek());
        std::string body = lex_.take().text;
        if (accept_kw("language"))
            fn.language = expect_ident("language name").text;
        else
            fn.language = "plpgsql";
        Parser body_parser(body);
        fn.body = body_parser.function_body();
        return fn;
    }

    PlBody function_body() {
        expect_kw("begin");
        PlBody body = pl_statements();
        expect_kw("end");
        accept_punct(";");
        if (lex_.peek().kind != Tok::End)
            lex_.fail("trailing input after END", lex_.peek());
        return body;
    }

    PlBody pl_statements() {
        PlBody out;
        while (!peek_kw("end") && !peek_kw("else") && !peek_kw("elsif") &&
               lex_.peek().kind != Tok::End) {
            out.push_back(pl_statement());
        }
        return out;
    }

    PlStmt pl_statement() {
        if (accept_kw("if")) {
            PlStmt st;
            st.kind = PlStmt::Kind::If;
            st.cond = expr();
            expect_kw("then");
            st.then_branch = std::make_shared<PlBody>(pl_statements());
            if (accept_kw("else"))
                st.else_branch = std::make_shared<PlBody>(pl_statements());
            expect_kw("end");
            expect_kw("if");
            expect_punct(";");
            return st;
        }
        if (peek_kw("update")) {
            PlStmt st;
            st.kind = PlStmt::Kind::Update;
            st.update = std::make_shared<UpdateStmt>(update_stmt());
            expect_punct(";");
            return st;
        }
        if (accept_kw("return")) {
            PlStmt st;
            st.kind = PlStmt::Kind::Return;
            if (accept_kw("null"))
                st.ret = nullptr;
            else
                st.ret = expr();
            expect_punct(";");
            return st;
        }
        lex_.fail("expected IF, UPDATE or RETURN in trigger body", lex_.peek());
    }

    CreateTriggerStmt create_trigger() {
        CreateTriggerStmt tr;
        tr.name = expect_ident("trigger name").text;
        if (accept_kw("after"))
            tr.timing = "after";
        else if (accept_kw("before"))
            tr.timing = "before";
        else
            lex_.fail("expected AFTER or BEFORE", lex_.peek());
        if (accept_kw("update"))
            tr.event = "update";
        else if (accept_kw("insert"))
            tr.event = "insert";
        else if (accept_kw("delete"))
            tr.event = "delete";
        else
            lex_.fail("expected UPDATE, INSERT or DELETE", lex_.peek());
        if (accept_kw("of")) {
            for (;;) {
                tr.of_columns.push_back(expect_ident("column name").text);
                if (!accept_punct(","))
                    break;
            }
        }
        expect_kw("on");
        tr.table = expect_ident("table name").text;
        if (accept_kw("for")) {
            expect_kw("each");
            expect_kw("row");
            tr.for_each_row = true;
        }
        if (accept_kw("when")) {
            expect_punct("(");
            tr.when = expr();
            expect_punct(")");
        }
        expect_kw("execute");
        if (!accept_kw("function"))
            expect_kw("procedure");
        tr.function_name = expect_ident("function name").text;
        expect_punct("(");
        expect_punct(")");
        return tr;
    }

    Statement drop_stmt() {
        expect_kw("drop");
        if (accept_kw("trigger")) {
            DropTriggerStmt d;
            if (accept_kw("if")) {
                expect_kw("exists");
                d.if_exists = true;
            }
            d.name = expect_ident("trigger name").text;
            expect_kw("on");
            d.table = expect_ident("table name").text;
            return Statement{d};
        }
        if (accept_kw("function")) {
            DropFunctionStmt d;
            if (accept_kw("if")) {
                expect_kw("exists");
                d.if_exists = true;
            }
            d.name = expect_ident("function name").text;
            if (accept_punct("("))
                expect_punct(")");
            return Statement{d};
        }
        lex_.fail("expected TRIGGER or FUNCTION after DROP", lex_.peek());
    }

    // ----- Expressions -----

    ExprPtr expr() { return or_expr(); }

    ExprPtr or_expr() {
        ExprPtr e = and_expr();
        while (accept_kw("or"))
            e = make_binary(BinaryOp::Or, e, and_expr());
        return e;
    }

    ExprPtr and_expr() {
        ExprPtr e = not_expr();
        while (accept_kw("and"))
            e = make_binary(BinaryOp::And, e, not_expr());
        return e;
    }

    ExprPtr not_expr() {
        if (accept_kw("not")) {
            auto n = std::make_shared<Expr>();
            n->kind = ExprKind::Unary;
            n->uop = UnaryOp::Not;
            n->operand = not_expr();
            return n;
        }
        return predicate();
    }

    ExprPtr predicate() {
        ExprPtr e = additive();
        for (;;) {
            if (peek_punct("=") || peek_punct("<>") || peek_punct("!=") || peek_punct("<") ||
                peek_punct("<=") || peek_punct(">") || peek_punct(">=")) {
                std::string op = lex_.take().text;
                BinaryOp b = op == "=" ? BinaryOp::Eq
                             : (op == "<>" || op == "!=") ? BinaryOp::Ne
                             : op == "<"                  ? BinaryOp::Lt
                             : op == "<="                 ? BinaryOp::Le
                             : op == ">"                  ? BinaryOp::Gt
                                                          : BinaryOp::Ge;
                e = make_binary(b, e, additive());
                continue;
            }
            if (accept_kw("is")) {
                bool neg = accept_kw("not");
                expect_kw("null");
                auto n = std::make_shared<Expr>();
                n->kind = ExprKind::IsNull;
                n->operand = e;
                n->negated = neg;
                e = n;
                continue;
            }
            bool neg = false;
            if (peek_kw("not")) {
                // NOT IN / NOT BETWEEN / NOT LIKE
                lex_.take();
                neg = true;
            }
            if (accept_kw("in")) {
                auto n = std::make_shared<Expr>();
                n->kind = ExprKind::InList;
                n->operand = e;
                n->negated = neg;
                expect_punct("(");
                for (;;) {
                    n->in_items.push_back(expr());
                    if (!accept_punct(","))
                        break;
                }
                expect_punct(")");
                e = n;
                continue;
            }
            if (accept_kw("between")) {
                auto n = std::make_shared<Expr>();
                n->kind = ExprKind::Between;
                n->operand = e;
                n->negated = neg;
                n->between_lo = additive();
                expect_kw("and");
                n->between_hi = additive();
                e = n;
                continue;
            }
            if (accept_kw("like")) {
                auto n = std::make_shared<Expr>();
                n->kind = ExprKind::Like;
                n->operand = e;
                n->negated = neg;
                n->like_pattern = additive();
                e = n;
                continue;
            }
            if (neg)
                lex_.fail("expected IN, BETWEEN or LIKE after NOT", lex_.peek());
            return e;
        }
    }

    ExprPtr additive() {
        ExprPtr e = multiplicative();
        for (;;) {
            if (accept_punct("+"))
                e = make_binary(BinaryOp::Add, e, multiplicative());
            else if (accept_punct("-"))
                e = make_binary(BinaryOp::Sub, e, multiplicative());
            else
                return e;
        }
    }

    ExprPtr multiplicative() {
        ExprPtr e = unary();
        for (;;) {
            if (accept_punct("*"))
                e = make_binary(BinaryOp::Mul, e, unary());
            else if (accept_punct("/"))
                e = make_binary(BinaryOp::Div, e, unary());
            else
                return e;
        }
    }

    ExprPtr unary() {
        if (accept_punct("-")) {
            auto n = std::make_shared<Expr>();
            n->kind = ExprKind::Unary;
            n->uop = UnaryOp::Neg;
            n->operand = unary();
            return n;
        }
        return postfix();
    }

    ExprPtr postfix() {
        ExprPtr e = primary();
        while (accept_punct("::")) {
            auto n = std::make_shared<Expr>();
            n->kind = ExprKind::Cast;
            n->operand = e;
            n->cast_type = expect_ident("type name").text;
            e = n;
        }
        return e;
    }

    ExprPtr primary() {
        const Token& t = lex_.peek();
        if (t.kind == Tok::Number) {
            Token num = lex_.take();
            Value v = num.is_int ? Value::integer(num.int_value) : Value::real(num.num_value);
            return make_literal(std::move(v), num.text, false);
        }
        if (t.kind == Tok::String) {
            Token str = lex_.take();
            return make_literal(Value::text(str.text), str.text, true);
        }
        if (t.kind == Tok::Punct && t.text == "?") {
            lex_.take();
            return make_placeholder();
        }
        if (t.kind == Tok::Punct && t.text == "(") {
            lex_.take();
            if (peek_kw("select")) {
                auto sub = std::make_shared<SelectStmt>(select_stmt());
                expect_punct(")");
                return make_subquery(sub);
            }
            ExprPtr e = expr();
            expect_punct(")");
            return e;
        }
        if (t.kind == Tok::Ident) {
            Token head = lex_.take();
            if (!head.quoted && head.text == "null")
                return make_literal(Value::null(), "NULL", false);
            if (!head.quoted && head.text == "true")
                return make_literal(Value::integer(1), "TRUE", false);
            if (!head.quoted && head.text == "false")
                return make_literal(Value::integer(0), "FALSE", false);
            if (peek_punct("(")) {
                // function call
                lex_.take();
                auto n = std::make_shared<Expr>();
                n->kind = ExprKind::FuncCall;
                n->func = head.text;
                if (accept_punct("*")) {
                    n->star = true;
                } else if (!peek_punct(")")) {
                    for (;;) {
                        n->args.push_back(expr());
                        if (!accept_punct(","))
                            break;
                    }
                }
                expect_punct(")");
                if (peek_kw("filter")) {
                    lex_.take();
                    expect_punct("(");
                    expect_kw("where");
                    n->filter_where = expr();
                    expect_punct(")");
                }
                return n;
            }
            if (peek_punct(".")) {
                lex_.take();
                Token col = expect_ident("column name");
                return make_column(head.text, col.text, col.quoted);
            }
            return make_column("", head.text, head.quoted);
        }
        lex_.fail("expected an expression", t);
    }
};

} // namespace

ExprPtr make_literal(Value v, std::string lexeme, bool is_string) {
    auto n = std::make_shared<Expr>();
    n->kind = ExprKind::Literal;
    n->value = std::move(v);
    n->lexeme = std::move(lexeme);
    n->is_string = is_string;
    return n;
}

ExprPtr make_column(std::string qualifier, std::string name, bool quoted) {
    auto n = std::make_shared<Expr>();
    n->kind = ExprKind::ColumnRef;
    n->qualifier = std::move(qualifier);
    n->name = std::move(name);
    n->quoted = quoted;
    return n;
}

ExprPtr make_binary(BinaryOp op, ExprPtr l, ExprPtr r) {
    auto n = std::make_shared<Expr>();
    n->kind = ExprKind::Binary;
    n->bop = op;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
}

ExprPtr make_subquery(SelectPtr s) {
    auto n = std::make_shared<Expr>();
    n->kind = ExprKind::Subquery;
    n->subquery = std::move(s);
    return n;
}

ExprPtr make_placeholder() {
    auto n = std::make_shared<Expr>();
    n->kind = ExprKind::Placeholder;
    return n;
}

std::vector<Statement> parse_script(const std::string& text) {
    Parser p(text);
    return p.script();
}

Statement parse_single(const std::string& text) {
    auto stmts = parse_script(text);
    if (stmts.empty())
        throw Error::parse("empty statement");
    if (stmts.size() > 1)
        throw Error::parse("expected a single statement, found " + std::to_string(stmts.size()));
    return std::move(stmts.front());
}

SelectStmt parse_select(const std::string& text) {
    Parser p(text);
    return p.select_only();
}

ExprPtr parse_expression(const std::string& text) {
    Parser p(text);
    return p.expr_only();
}

std::string fold_identifier(std::string_view raw) {
    return to_lower(raw);
}

} // namespace castle::sql
