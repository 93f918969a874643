#include "castle/sql.hpp"

#include "castle/error.hpp"

namespace castle::sql {

namespace {

std::string quote_ident(const std::string& name) {
    std::string out = "\"";
    for (char c : name) {
        out.push_back(c);
        if (c == '"')
            out.push_back('"');
    }
    out.push_back('"');
    return out;
}

std::string quote_string(const std::string& s) {
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

const char* binary_op_text(BinaryOp op) {
    switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Eq: return "=";
    case BinaryOp::Ne: return "<>";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::And: return "AND";
    case BinaryOp::Or: return "OR";
    }
    return "?";
}

int precedence(BinaryOp op) {
    switch (op) {
    case BinaryOp::Or: return 1;
    case BinaryOp::And: return 2;
    case BinaryOp::Eq:
    case BinaryOp::Ne:
    case BinaryOp::Lt:
    case BinaryOp::Le:
    case BinaryOp::Gt:
    case BinaryOp::Ge: return 3;
    case BinaryOp::Add:
    case BinaryOp::Sub: return 4;
    case BinaryOp::Mul:
    case BinaryOp::Div: return 5;
    }
    return 0;
}

std::string render(const ExprPtr& e, Dialect d, int parent_prec);

std::string render_operand(const ExprPtr& e, Dialect d, int prec) {
    return render(e, d, prec);
}

std::string render(const ExprPtr& e, Dialect d, int parent_prec) {
    switch (e->kind) {
    case ExprKind::Literal:
        if (e->is_string)
            return quote_string(e->value.as_text());
        return e->lexeme.empty() ? canonical_text(e->value, std::nullopt) : e->lexeme;
    case ExprKind::ColumnRef: {
        std::string out;
        if (!e->qualifier.empty()) {
            if (e->qualifier == "old" || e->qualifier == "new")
                out = e->qualifier == "old" ? "OLD." : "NEW.";
            else
                out = quote_ident(e->qualifier) + ".";
        }
        return out + quote_ident(e->name);
    }
    case ExprKind::Unary: {
        if (e->uop == UnaryOp::Neg)
            return "-" + render_operand(e->operand, d, 6);
        return "NOT " + render_operand(e->operand, d, 2);
    }
    case ExprKind::Binary: {
        int prec = precedence(e->bop);
        std::string out = render_operand(e->lhs, d, prec) + " " + binary_op_text(e->bop) + " " +
                          render_operand(e->rhs, d, prec + 1);
        if (prec < parent_prec)
            return "(" + out + ")";
        return out;
    }
    case ExprKind::FuncCall: {
        std::string out = e->func + "(";
        if (e->star) {
            out += "*";
        } else {
            for (size_t i = 0; i < e->args.size(); ++i) {
                if (i)
                    out += ", ";
                out += render(e->args[i], d, 0);
            }
        }
        out += ")";
        if (e->filter_where)
            out += " FILTER (WHERE " + render(e->filter_where, d, 0) + ")";
        return out;
    }
    case ExprKind::Subquery:
        return "(" + render_select(*e->subquery, d) + ")";
    case ExprKind::Cast:
        return render_operand(e->operand, d, 6) + "::" + e->cast_type;
    case ExprKind::IsNull:
        return render_operand(e->operand, d, 4) + (e->negated ? " IS NOT NULL" : " IS NULL");
    case ExprKind::InList: {
        std::string out = render_operand(e->operand, d, 4) + (e->negated ? " NOT IN (" : " IN (");
        for (size_t i = 0; i < e->in_items.size(); ++i) {
            if (i)
                out += ", ";
            out += render(e->in_items[i], d, 0);
        }
        return out + ")";
    }
    case ExprKind::Between:
        return render_operand(e->operand, d, 4) + (e->negated ? " NOT BETWEEN " : " BETWEEN ") +
               render_operand(e->between_lo, d, 4) + " AND " + render_operand(e->between_hi, d, 4);
    case ExprKind::Like:
        return render_operand(e->operand, d, 4) + (e->negated ? " NOT LIKE " : " LIKE ") +
               render_operand(e->like_pattern, d, 4);
    case ExprKind::Placeholder:
        return "?";
    }
    throw Error::internal("unknown expression kind");
}

} // namespace

std::string render_expr(const ExprPtr& e, Dialect d) {
    return render(e, d, 0);
}

std::string render_select(const SelectStmt& s, Dialect d) {
    std::string out = "SELECT ";
    if (s.limit && limit_form(d) == LimitForm::Top)
        out += "TOP " + std::to_string(*s.limit) + " ";
    for (size_t i = 0; i < s.items.size(); ++i) {
        if (i)
            out += ", ";
        out += render_expr(s.items[i].expr, d);
        if (!s.items[i].alias.empty())
            out += " AS " + std::string("\"") + s.items[i].alias + "\"";
    }
    if (s.has_from) {
        out += " FROM ";
        if (s.from_select) {
            out += "(" + render_select(*s.from_select, d) + ") AS \"" + s.from_alias + "\"";
        } else {
            // dotted catalog names stay unquoted as written
            if (s.from_table.find('.') != std::string::npos)
                out += s.from_table;
            else
                out += "\"" + s.from_table + "\"";
            if (!s.from_alias.empty())
                out += " AS \"" + s.from_alias + "\"";
        }
    }
    if (s.where)
        out += " WHERE " + render_expr(s.where, d);
    if (!s.group_by.empty()) {
        out += " GROUP BY ";
        for (size_t i = 0; i < s.group_by.size(); ++i) {
            if (i)
                out += ", ";
            out += render_expr(s.group_by[i], d);
        }
    }
    if (!s.order_by.empty()) {
        out += " ORDER BY ";
        for (size_t i = 0; i < s.order_by.size(); ++i) {
            if (i)
                out += ", ";
            out += render_expr(s.order_by[i].expr, d);
            if (!s.order_by[i].asc)
                out += " DESC";
        }
    }
    if (s.limit && limit_form(d) == LimitForm::Limit)
        out += " LIMIT " + std::to_string(*s.limit);
    return out;
}

std::string render_update(const UpdateStmt& u, Dialect d) {
    std::string out = "UPDATE \"" + u.table + "\" SET ";
    for (size_t i = 0; i < u.sets.size(); ++i) {
        if (i)
            out += ", ";
        out += "\"" + u.sets[i].column + "\" = " + render_expr(u.sets[i].value, d);
    }
    if (u.where)
        out += " WHERE " + render_expr(u.where, d);
    return out;
}

std::string render_statement(const Statement& s, Dialect d) {
    if (auto* sel = s.as<SelectStmt>())
        return render_select(*sel, d) + ";";
    if (auto* upd = s.as<UpdateStmt>())
        return render_update(*upd, d) + ";";
    throw Error::internal("rendering unsupported statement kind");
}

// ---------------------------------------------------------------------------
// Structural equality
// ---------------------------------------------------------------------------

bool equal_expr(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b)
        return !a && !b;
    if (a->kind != b->kind)
        return false;
    switch (a->kind) {
    case ExprKind::Literal:
        return a->value.equals(b->value);
    case ExprKind::ColumnRef:
        return a->qualifier == b->qualifier && a->name == b->name;
    case ExprKind::Unary:
        return a->uop == b->uop && equal_expr(a->operand, b->operand);
    case ExprKind::Binary:
        return a->bop == b->bop && equal_expr(a->lhs, b->lhs) && equal_expr(a->rhs, b->rhs);
    case ExprKind::FuncCall: {
        if (a->func != b->func || a->star != b->star || a->args.size() != b->args.size())
            return false;
        for (size_t i = 0; i < a->args.size(); ++i)
            if (!equal_expr(a->args[i], b->args[i]))
                return false;
        return equal_expr(a->filter_where, b->filter_where);
    }
    case ExprKind::Subquery:
        return equal_select(*a->subquery, *b->subquery);
    case ExprKind::Cast:
        return a->cast_type == b->cast_type && equal_expr(a->operand, b->operand);
    case ExprKind::IsNull:
        return a->negated == b->negated && equal_expr(a->operand, b->operand);
    case ExprKind::InList: {
        if (a->negated != b->negated || a->in_items.size() != b->in_items.size())
            return false;
        if (!equal_expr(a->operand, b->operand))
            return false;
        for (size_t i = 0; i < a->in_items.size(); ++i)
            if (!equal_expr(a->in_items[i], b->in_items[i]))
                return false;
        return true;
    }
    case ExprKind::Between:
        return a->negated == b->negated && equal_expr(a->operand, b->operand) &&
               equal_expr(a->between_lo, b->between_lo) && equal_expr(a->between_hi, b->between_hi);
    case ExprKind::Like:
        return a->negated == b->negated && equal_expr(a->operand, b->operand) &&
               equal_expr(a->like_pattern, b->like_pattern);
    case ExprKind::Placeholder:
        return true;
    }
    return false;
}

bool equal_select(const SelectStmt& a, const SelectStmt& b) {
    if (a.items.size() != b.items.size())
        return false;
    for (size_t i = 0; i < a.items.size(); ++i) {
        if (a.items[i].alias != b.items[i].alias)
            return false;
        if (!equal_expr(a.items[i].expr, b.items[i].expr))
            return false;
    }
    if (a.has_from != b.has_from || a.from_table != b.from_table || a.from_alias != b.from_alias)
        return false;
    if (static_cast<bool>(a.from_select) != static_cast<bool>(b.from_select))
        return false;
    if (a.from_select && !equal_select(*a.from_select, *b.from_select))
        return false;
    if (!equal_expr(a.where, b.where))
        return false;
    if (a.group_by.size() != b.group_by.size())
        return false;
    for (size_t i = 0; i < a.group_by.size(); ++i)
        if (!equal_expr(a.group_by[i], b.group_by[i]))
            return false;
    if (a.order_by.size() != b.order_by.size())
        return false;
    for (size_t i = 0; i < a.order_by.size(); ++i) {
        if (a.order_by[i].asc != b.order_by[i].asc)
            return false;
        if (!equal_expr(a.order_by[i].expr, b.order_by[i].expr))
            return false;
    }
    return a.limit == b.limit; // surface form deliberately ignored
}

bool contains_aggregate(const ExprPtr& e) {
    if (!e)
        return false;
    if (e->kind == ExprKind::FuncCall) {
        static const char* aggs[] = {"count", "sum", "avg", "min", "max"};
        for (const char* a : aggs)
            if (e->func == a)
                return true;
        for (const auto& arg : e->args)
            if (contains_aggregate(arg))
                return true;
        return contains_aggregate(e->filter_where);
    }
    switch (e->kind) {
    case ExprKind::Unary: return contains_aggregate(e->operand);
    case ExprKind::Binary: return contains_aggregate(e->lhs) || contains_aggregate(e->rhs);
    case ExprKind::Cast: return contains_aggregate(e->operand);
    case ExprKind::IsNull: return contains_aggregate(e->operand);
    case ExprKind::Between:
        return contains_aggregate(e->operand) || contains_aggregate(e->between_lo) ||
               contains_aggregate(e->between_hi);
    case ExprKind::Like:
        return contains_aggregate(e->operand) || contains_aggregate(e->like_pattern);
    case ExprKind::InList: {
        if (contains_aggregate(e->operand))
            return true;
        for (const auto& item : e->in_items)
            if (contains_aggregate(item))
                return true;
        return false;
    }
    default: return false;
    }
}

bool equal_update(const UpdateStmt& a, const UpdateStmt& b) {
    if (a.table != b.table || a.sets.size() != b.sets.size())
        return false;
    for (size_t i = 0; i < a.sets.size(); ++i) {
        if (a.sets[i].column != b.sets[i].column)
            return false;
        if (!equal_expr(a.sets[i].value, b.sets[i].value))
            return false;
    }
    return equal_expr(a.where, b.where);
}

} // namespace castle::sql
