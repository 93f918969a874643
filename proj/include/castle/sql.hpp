#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "castle/dialect.hpp"
#include "castle/value.hpp"

namespace castle::sql {

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct SelectStmt;
using SelectPtr = std::shared_ptr<const SelectStmt>;

enum class BinaryOp { Add, Sub, Mul, Div, Eq, Ne, Lt, Le, Gt, Ge, And, Or };
enum class UnaryOp { Neg, Not };

enum class ExprKind {
    Literal,
    ColumnRef,
    Unary,
    Binary,
    FuncCall,
    Subquery,
    Cast,
    IsNull,
    InList,
    Between,
    Like,
    Placeholder,
};

struct Expr {
    ExprKind kind{};

    // Literal
    Value value;
    std::string lexeme;   // numeric literals keep their source spelling
    bool is_string = false;

    // ColumnRef
    std::string qualifier; // "", alias, table, OLD, NEW
    std::string name;
    bool quoted = false;

    // Unary / Binary
    UnaryOp uop{};
    BinaryOp bop{};
    ExprPtr lhs, rhs, operand;

    // FuncCall
    std::string func; // lowercased
    std::vector<ExprPtr> args;
    bool star = false;          // count(*)
    ExprPtr filter_where;       // agg(...) FILTER (WHERE ...)

    // Subquery
    SelectPtr subquery;

    // Cast
    std::string cast_type;

    // IsNull / InList / Between / Like share operand (+ fields below)
    bool negated = false;
    std::vector<ExprPtr> in_items;
    ExprPtr between_lo, between_hi;
    ExprPtr like_pattern;
};

ExprPtr make_literal(Value v, std::string lexeme, bool is_string);
ExprPtr make_column(std::string qualifier, std::string name, bool quoted = false);
ExprPtr make_binary(BinaryOp op, ExprPtr l, ExprPtr r);
ExprPtr make_subquery(SelectPtr s);
ExprPtr make_placeholder();

// ---------------------------------------------------------------------------
// Statements
// ---------------------------------------------------------------------------

struct SelectStmt {
    struct Item {
        ExprPtr expr;
        std::string alias; // from AS, empty if none
    };
    std::vector<Item> items;

    bool has_from = false;
    std::string from_table;                 // empty when derived
    std::shared_ptr<const SelectStmt> from_select; // derived table
    std::string from_alias;

    ExprPtr where;
    std::vector<ExprPtr> group_by;
    struct OrderItem {
        ExprPtr expr;
        bool asc = true;
    };
    std::vector<OrderItem> order_by;

    std::optional<int64_t> limit;
    // Which surface syntax carried the limit (LIMIT n vs TOP n). Structural
    // equality ignores this; dialect validation reads it.
    std::optional<LimitForm> limit_surface;
};

struct UpdateStmt {
    struct SetItem {
        std::string column;
        bool quoted = false;
        ExprPtr value;
    };
    std::string table;
    std::vector<SetItem> sets;
    ExprPtr where; // may be null at parse level; policy checks live in forge
};

struct DeleteStmt {
    std::string table;
    ExprPtr where;
};

struct InsertStmt {
    std::string table;
    std::vector<std::string> columns;
    std::vector<std::vector<ExprPtr>> rows;
};

struct ColumnDefAst {
    std::string name;
    std::string type_name; // canonical upper-case: SERIAL, VARCHAR, ...
    std::optional<int> length;    // VARCHAR(n)
    std::optional<int> precision; // DECIMAL(p,s)
    std::optional<int> scale;
    bool not_null = false;
    bool inline_pk = false;
};

struct CreateTableStmt {
    std::string name;
    bool if_not_exists = false;
    std::vector<ColumnDefAst> columns;
    std::vector<std::string> primary_key; // composite or from inline pk
};

// Minimal trigger-function body language: IF / UPDATE / RETURN.
struct PlStmt;
using PlBody = std::vector<PlStmt>;

struct PlStmt {
    enum class Kind { If, Update, Return } kind{};
    // If
    ExprPtr cond;
    std::shared_ptr<PlBody> then_branch;
    std::shared_ptr<PlBody> else_branch;
    // Update
    std::shared_ptr<UpdateStmt> update;
    // Return
    ExprPtr ret; // null for RETURN NULL
};

struct CreateFunctionStmt {
    std::string name;
    bool or_replace = false;
    PlBody body;
    std::string language; // plpgsql
};

struct CreateTriggerStmt {
    std::string name;
    std::string timing; // after
    std::string event;  // update
    std::vector<std::string> of_columns;
    std::string table;
    bool for_each_row = false;
    ExprPtr when; // optional
    std::string function_name;
};

struct DropTriggerStmt {
    std::string name;
    std::string table;
    bool if_exists = false;
};

struct DropFunctionStmt {
    std::string name;
    bool if_exists = false;
};

struct TxnStmt {
    enum class Kind { Begin, Commit, Rollback } kind{};
};

using StatementNode = std::variant<SelectStmt, UpdateStmt, DeleteStmt, InsertStmt, CreateTableStmt,
                                   CreateFunctionStmt, CreateTriggerStmt, DropTriggerStmt,
                                   DropFunctionStmt, TxnStmt>;

struct Statement {
    StatementNode node;

    template <typename T> const T* as() const { return std::get_if<T>(&node); }
    template <typename T> bool is() const { return std::holds_alternative<T>(node); }
};

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

// Parses a script of semicolon-separated statements. Errors carry line:col.
std::vector<Statement> parse_script(const std::string& text);

// Exactly one statement; rejects trailing statements.
Statement parse_single(const std::string& text);

SelectStmt parse_select(const std::string& text);
ExprPtr parse_expression(const std::string& text);

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------
// Identifiers are always double-quoted; string literals single-quoted with ''
// escaping; the scalar-limit clause follows the target dialect's form.

std::string render_expr(const ExprPtr& e, Dialect d);
std::string render_select(const SelectStmt& s, Dialect d);
std::string render_update(const UpdateStmt& u, Dialect d);
std::string render_statement(const Statement& s, Dialect d);

// ---------------------------------------------------------------------------
// Structural equality (surface details like quoting and limit syntax ignored)
// ---------------------------------------------------------------------------

bool equal_expr(const ExprPtr& a, const ExprPtr& b);
bool equal_select(const SelectStmt& a, const SelectStmt& b);
bool equal_update(const UpdateStmt& a, const UpdateStmt& b);

// True when the expression contains count/sum/avg/min/max anywhere outside a
// nested subquery.
bool contains_aggregate(const ExprPtr& e);

// Lowercases unquoted identifiers per the canonicalization policy.
std::string fold_identifier(std::string_view raw);

} // namespace castle::sql
