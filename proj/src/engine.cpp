#include "castle/engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "castle/error.hpp"

#include "json.hpp"

namespace castle::engine {

namespace {

using Row = std::vector<Value>;

bool like_match(const std::string& text, const std::string& pattern, size_t ti = 0, size_t pi = 0) {
    while (pi < pattern.size()) {
        char p = pattern[pi];
        if (p == '%') {
            // collapse consecutive wildcards
            while (pi + 1 < pattern.size() && pattern[pi + 1] == '%')
                ++pi;
            if (pi + 1 == pattern.size())
                return true;
            for (size_t i = ti; i <= text.size(); ++i)
                if (like_match(text, pattern, i, pi + 1))
                    return true;
            return false;
        }
        if (ti >= text.size())
            return false;
        if (p != '_' && text[ti] != p)
            return false;
        ++ti;
        ++pi;
    }
    return ti == text.size();
}

std::string canonical_jsonb(const std::string& text) {
    nlohmann::json parsed = nlohmann::json::parse(text, nullptr, false);
    if (parsed.is_discarded())
        throw Error::db("invalid input syntax for type json: " + text);
    return parsed.dump();
}

bool truthy(const Value& v) {
    if (v.is_null())
        return false;
    if (v.is_numeric())
        return v.as_real() != 0.0;
    return !v.as_text().empty();
}

} // namespace

// ---------------------------------------------------------------------------
// Executor
// ---------------------------------------------------------------------------

class Executor {
public:
    using State = Database::State;
    using StoredTable = Database::StoredTable;

    Executor(Database& db) : db_(db) {}

    // A row scope the expression evaluator can resolve columns against.
    struct Scope {
        std::vector<std::string> columns;
        const Row* row = nullptr;
        std::string name;  // table name
        std::string alias; // alias if any
    };

    struct Env {
        const Env* parent = nullptr;
        Scope scope;
        const Row* old_row = nullptr;
        const Row* new_row = nullptr;
        const TableSchema* trigger_schema = nullptr;
    };

    ExecResult exec(const sql::Statement& stmt, const Env* env) {
        if (const auto* s = stmt.as<sql::SelectStmt>()) {
            ExecResult r;
            r.kind = ExecResult::Kind::Select;
            r.result = select(*s, env, &db_.state_);
            return r;
        }
        if (const auto* u = stmt.as<sql::UpdateStmt>()) {
            ExecResult r;
            r.kind = ExecResult::Kind::Update;
            r.affected = update(*u, env);
            return r;
        }
        if (const auto* i = stmt.as<sql::InsertStmt>()) {
            ExecResult r;
            r.kind = ExecResult::Kind::Insert;
            r.affected = insert(*i);
            return r;
        }
        if (const auto* c = stmt.as<sql::CreateTableStmt>())
            return create_table(*c);
        if (const auto* f = stmt.as<sql::CreateFunctionStmt>())
            return create_function(*f);
        if (const auto* t = stmt.as<sql::CreateTriggerStmt>())
            return create_trigger(*t);
        if (const auto* d = stmt.as<sql::DropTriggerStmt>())
            return drop_trigger(*d);
        if (const auto* d = stmt.as<sql::DropFunctionStmt>())
            return drop_function(*d);
        if (const auto* x = stmt.as<sql::TxnStmt>()) {
            switch (x->kind) {
            case sql::TxnStmt::Kind::Begin: db_.begin(); break;
            case sql::TxnStmt::Kind::Commit: db_.commit(); break;
            case sql::TxnStmt::Kind::Rollback: db_.rollback(); break;
            }
            ExecResult r;
            r.kind = ExecResult::Kind::Txn;
            return r;
        }
        if (stmt.as<sql::DeleteStmt>())
            throw Error::db("DELETE is not supported by this engine");
        throw Error::internal("unhandled statement kind");
    }

    ResultSet select(const sql::SelectStmt& s, const Env* outer, const State* read_state) {
        // Source rows
        std::vector<Scope> source;
        std::vector<Row> derived_storage;
        std::vector<std::string> columns;
        std::string src_name, src_alias = s.from_alias;

        if (!s.has_from) {
            source.push_back(Scope{});
        } else if (s.from_select) {
            ResultSet inner = select(*s.from_select, outer, read_state);
            columns = inner.columns;
            derived_storage = std::move(inner.rows);
            src_name = s.from_alias;
            for (const auto& row : derived_storage) {
                Scope sc;
                sc.columns = columns;
                sc.row = &row;
                sc.name = src_name;
                sc.alias = src_alias;
                source.push_back(sc);
            }
        } else if (s.from_table == "pg_trigger" || s.from_table == "information_schema.triggers") {
            bool pg = s.from_table == "pg_trigger";
            columns = pg ? std::vector<std::string>{"tgname", "tgrelid"}
                         : std::vector<std::string>{"trigger_name", "event_object_table",
                                                    "action_timing", "event_manipulation"};
            for (const auto& tr : read_state->triggers) {
                Row row;
                if (pg) {
                    row = {Value::text(tr.def.name), Value::text(tr.def.table)};
                } else {
                    std::string timing = tr.def.timing;
                    std::string event = tr.def.event;
                    std::transform(timing.begin(), timing.end(), timing.begin(), ::toupper);
                    std::transform(event.begin(), event.end(), event.begin(), ::toupper);
                    row = {Value::text(tr.def.name), Value::text(tr.def.table), Value::text(timing),
                           Value::text(event)};
                }
                derived_storage.push_back(std::move(row));
            }
            src_name = s.from_table;
            for (const auto& row : derived_storage) {
                Scope sc;
                sc.columns = columns;
                sc.row = &row;
                sc.name = src_name;
                sc.alias = src_alias;
                source.push_back(sc);
            }
        } else {
            const StoredTable* table = find_table(*read_state, s.from_table);
            if (!table)
                throw Error::db("relation does not exist: " + s.from_table);
            for (const auto& c : table->schema.columns)
                columns.push_back(c.name);
            src_name = s.from_table;
            for (const auto& row : table->rows) {
                Scope sc;
                sc.columns = columns;
                sc.row = &row;
                sc.name = src_name;
                sc.alias = src_alias;
                source.push_back(sc);
            }
        }

        // WHERE filter
        std::vector<Scope> filtered;
        for (const auto& sc : source) {
            if (s.where) {
                Env env;
                env.parent = outer;
                env.scope = sc;
                Value v = eval(s.where, &env, read_state);
                if (!truthy(v))
                    continue;
            }
            filtered.push_back(sc);
        }

        bool grouped = !s.group_by.empty();
        if (!grouped) {
            for (const auto& item : s.items)
                if (sql::contains_aggregate(item.expr))
                    grouped = true;
        }

        ResultSet out;
        for (size_t i = 0; i < s.items.size(); ++i)
            out.columns.push_back(item_name(s.items[i]));

        if (grouped) {
            // group rows by key tuple
            std::vector<std::pair<std::vector<std::string>, std::vector<Scope>>> groups;
            std::map<std::vector<std::string>, size_t> index;
            for (const auto& sc : filtered) {
                std::vector<std::string> key;
                for (const auto& g : s.group_by) {
                    Env env;
                    env.parent = outer;
                    env.scope = sc;
                    key.push_back(canonical_text(eval(resolve_output_alias(g, s), &env, read_state),
                                                 std::nullopt));
                }
                auto it = index.find(key);
                if (it == index.end()) {
                    index.emplace(key, groups.size());
                    groups.push_back({key, {sc}});
                } else {
                    groups[it->second].second.push_back(sc);
                }
            }
            if (s.group_by.empty() && !filtered.empty())
                groups.push_back({{}, filtered});
            if (s.group_by.empty() && filtered.empty())
                groups.push_back({{}, {}}); // aggregates over the empty set still yield one row
            for (auto& [key, members] : groups) {
                Row row;
                for (const auto& item : s.items)
                    row.push_back(eval_grouped(item.expr, members, outer, read_state));
                out.rows.push_back(std::move(row));
            }
        } else {
            for (const auto& sc : filtered) {
                Row row;
                Env env;
                env.parent = outer;
                env.scope = sc;
                for (const auto& item : s.items)
                    row.push_back(eval(item.expr, &env, read_state));
                out.rows.push_back(std::move(row));
            }
        }

        // ORDER BY over result rows: re-evaluate per source scope is not possible
        // after grouping, so order by output columns or plain expressions.
        if (!s.order_by.empty()) {
            std::vector<size_t> order(out.rows.size());
            for (size_t i = 0; i < order.size(); ++i)
                order[i] = i;
            std::vector<std::vector<Value>> keys(out.rows.size());
            for (size_t i = 0; i < out.rows.size(); ++i) {
                for (const auto& ob : s.order_by) {
                    int idx = output_index(ob.expr, s, out);
                    if (idx >= 0) {
                        keys[i].push_back(out.rows[i][static_cast<size_t>(idx)]);
                    } else if (!grouped && i < filtered.size()) {
                        Env env;
                        env.parent = outer;
                        env.scope = filtered[i];
                        keys[i].push_back(eval(ob.expr, &env, read_state));
                    } else {
                        throw Error::db("ORDER BY expression must name an output column");
                    }
                }
            }
            std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
                for (size_t k = 0; k < s.order_by.size(); ++k) {
                    auto c = keys[a][k].compare(keys[b][k]);
                    int cv = c ? *c : (keys[a][k].is_null() == keys[b][k].is_null() ? 0
                                       : keys[a][k].is_null()                       ? 1
                                                                                    : -1);
                    if (cv != 0)
                        return s.order_by[k].asc ? cv < 0 : cv > 0;
                }
                return false;
            });
            std::vector<Row> sorted;
            sorted.reserve(out.rows.size());
            for (size_t i : order)
                sorted.push_back(std::move(out.rows[i]));
            out.rows = std::move(sorted);
        }

        if (s.limit && out.rows.size() > static_cast<size_t>(*s.limit))
            out.rows.resize(static_cast<size_t>(*s.limit));
        return out;
    }

    int64_t update(const sql::UpdateStmt& u, const Env* outer) {
        StoredTable* table = find_table_mut(db_.state_, u.table);
        if (!table)
            throw Error::db("relation does not exist: " + u.table);
        for (const auto& set : u.sets)
            if (table->schema.column_index(set.column) < 0)
                throw Error::db("column does not exist: " + u.table + "." + set.column);

        // Reads within the statement see the state as of statement start.
        State snapshot = db_.state_;
        const StoredTable* snap_table = find_table(snapshot, u.table);

        struct RowEvent {
            Row old_row;
            Row new_row;
        };
        std::vector<std::pair<size_t, Row>> writes;
        std::vector<RowEvent> events;
        std::set<std::string> set_columns;
        for (const auto& set : u.sets)
            set_columns.insert(set.column);

        std::vector<std::string> columns;
        for (const auto& c : table->schema.columns)
            columns.push_back(c.name);

        for (size_t i = 0; i < snap_table->rows.size(); ++i) {
            const Row& old_row = snap_table->rows[i];
            Env env;
            env.parent = outer;
            env.scope = Scope{columns, &old_row, u.table, ""};
            if (u.where) {
                Value cond = eval(u.where, &env, &snapshot);
                if (!truthy(cond))
                    continue;
            }
            Row new_row = old_row;
            for (const auto& set : u.sets) {
                int idx = table->schema.column_index(set.column);
                Value v = eval(set.value, &env, &snapshot);
                new_row[static_cast<size_t>(idx)] =
                    coerce(v, table->schema.columns[static_cast<size_t>(idx)], u.table);
            }
            writes.push_back({i, new_row});
            events.push_back({old_row, std::move(new_row)});
        }

        for (auto& [i, row] : writes)
            table->rows[i] = std::move(row);

        // Row-level AFTER UPDATE triggers fire once the statement has applied,
        // in row order then trigger-name order.
        if (!events.empty()) {
            std::vector<const Database::TriggerRecord*> matching;
            for (const auto& tr : db_.state_.triggers) {
                if (tr.def.table != u.table)
                    continue;
                if (!tr.def.of_columns.empty()) {
                    bool hit = false;
                    for (const auto& c : tr.def.of_columns)
                        if (set_columns.count(c))
                            hit = true;
                    if (!hit)
                        continue;
                }
                matching.push_back(&tr);
            }
            std::sort(matching.begin(), matching.end(),
                      [](const auto* a, const auto* b) { return a->def.name < b->def.name; });
            for (const auto& ev : events) {
                for (const auto* tr : matching)
                    fire_trigger(*tr, table->schema, ev.old_row, ev.new_row);
            }
        }
        return static_cast<int64_t>(events.size());
    }

    Value eval(const sql::ExprPtr& e, const Env* env, const State* read_state) {
        using sql::ExprKind;
        switch (e->kind) {
        case ExprKind::Literal:
            return e->value;
        case ExprKind::ColumnRef:
            return resolve_column(e->qualifier, e->name, env);
        case ExprKind::Unary: {
            Value v = eval(e->operand, env, read_state);
            if (e->uop == sql::UnaryOp::Neg) {
                if (v.is_null())
                    return Value::null();
                if (v.is_integer())
                    return Value::integer(-v.as_integer());
                if (v.is_real())
                    return Value::real(-v.as_real());
                throw Error::db("cannot negate a non-numeric value");
            }
            if (v.is_null())
                return Value::null();
            return Value::integer(truthy(v) ? 0 : 1);
        }
        case ExprKind::Binary:
            return eval_binary(e, env, read_state);
        case ExprKind::FuncCall:
            return eval_func(e, env, read_state);
        case ExprKind::Subquery:
            return scalar_subquery(*e->subquery, env, read_state);
        case ExprKind::Cast: {
            Value v = eval(e->operand, env, read_state);
            if (e->cast_type == "regclass" || e->cast_type == "text")
                return v;
            if (e->cast_type == "integer") {
                if (v.is_null())
                    return v;
                if (v.is_numeric())
                    return Value::integer(static_cast<int64_t>(v.as_real()));
                return Value::integer(std::stoll(v.as_text()));
            }
            if (e->cast_type == "numeric" || e->cast_type == "decimal") {
                if (v.is_null() || v.is_numeric())
                    return v;
                return Value::real(std::stod(v.as_text()));
            }
            throw Error::db("unsupported cast target: " + e->cast_type);
        }
        case ExprKind::IsNull: {
            Value v = eval(e->operand, env, read_state);
            bool isnull = v.is_null();
            return Value::integer((e->negated ? !isnull : isnull) ? 1 : 0);
        }
        case ExprKind::InList: {
            Value v = eval(e->operand, env, read_state);
            if (v.is_null())
                return Value::null();
            bool found = false;
            bool saw_null = false;
            for (const auto& item : e->in_items) {
                Value iv = eval(item, env, read_state);
                if (iv.is_null()) {
                    saw_null = true;
                    continue;
                }
                auto c = v.compare(iv);
                if (c && *c == 0)
                    found = true;
            }
            if (found)
                return Value::integer(e->negated ? 0 : 1);
            if (saw_null)
                return Value::null();
            return Value::integer(e->negated ? 1 : 0);
        }
        case ExprKind::Between: {
            Value v = eval(e->operand, env, read_state);
            Value lo = eval(e->between_lo, env, read_state);
            Value hi = eval(e->between_hi, env, read_state);
            if (v.is_null() || lo.is_null() || hi.is_null())
                return Value::null();
            auto c1 = v.compare(lo);
            auto c2 = v.compare(hi);
            bool in = c1 && c2 && *c1 >= 0 && *c2 <= 0;
            return Value::integer((e->negated ? !in : in) ? 1 : 0);
        }
        case ExprKind::Like: {
            Value v = eval(e->operand, env, read_state);
            Value p = eval(e->like_pattern, env, read_state);
            if (v.is_null() || p.is_null())
                return Value::null();
            if (!v.is_text() || !p.is_text())
                throw Error::db("LIKE requires text operands");
            bool m = like_match(v.as_text(), p.as_text());
            return Value::integer((e->negated ? !m : m) ? 1 : 0);
        }
        case ExprKind::Placeholder:
            throw Error::db("placeholder '?' cannot be executed");
        }
        throw Error::internal("unknown expression kind");
    }

private:
    Database& db_;

    static const StoredTable* find_table(const State& st, const std::string& name) {
        for (const auto& t : st.tables)
            if (t.schema.name == name)
                return &t;
        return nullptr;
    }

    static StoredTable* find_table_mut(State& st, const std::string& name) {
        for (auto& t : st.tables)
            if (t.schema.name == name)
                return &t;
        return nullptr;
    }

    static std::string item_name(const sql::SelectStmt::Item& item) {
        if (!item.alias.empty())
            return item.alias;
        if (item.expr->kind == sql::ExprKind::ColumnRef)
            return item.expr->name;
        if (item.expr->kind == sql::ExprKind::FuncCall)
            return item.expr->func;
        return "?column?";
    }

    // GROUP BY / ORDER BY may name an output column alias.
    static sql::ExprPtr resolve_output_alias(const sql::ExprPtr& e, const sql::SelectStmt& s) {
        if (e->kind == sql::ExprKind::ColumnRef && e->qualifier.empty()) {
            for (const auto& item : s.items)
                if (item.alias == e->name)
                    return item.expr;
        }
        return e;
    }

    static int output_index(const sql::ExprPtr& e, const sql::SelectStmt& s, const ResultSet& out) {
        if (e->kind != sql::ExprKind::ColumnRef || !e->qualifier.empty())
            return -1;
        for (size_t i = 0; i < out.columns.size(); ++i)
            if (out.columns[i] == e->name)
                return static_cast<int>(i);
        (void)s;
        return -1;
    }

    Value resolve_column(const std::string& qualifier, const std::string& name, const Env* env) {
        for (const Env* e = env; e; e = e->parent) {
            if (qualifier == "old" || qualifier == "new") {
                const Row* row = qualifier == "old" ? e->old_row : e->new_row;
                if (row && e->trigger_schema) {
                    int idx = e->trigger_schema->column_index(name);
                    if (idx < 0)
                        throw Error::db("column does not exist: " + qualifier + "." + name);
                    return (*row)[static_cast<size_t>(idx)];
                }
                continue;
            }
            const Scope& sc = e->scope;
            if (!sc.row)
                continue;
            if (!qualifier.empty() && qualifier != sc.alias && qualifier != sc.name)
                continue;
            for (size_t i = 0; i < sc.columns.size(); ++i)
                if (sc.columns[i] == name)
                    return (*sc.row)[i];
            if (!qualifier.empty())
                throw Error::db("column does not exist: " + qualifier + "." + name);
        }
        throw Error::db("column does not exist: " + (qualifier.empty() ? name : qualifier + "." + name));
    }

    Value eval_binary(const sql::ExprPtr& e, const Env* env, const State* read_state) {
        using sql::BinaryOp;
        if (e->bop == BinaryOp::And || e->bop == BinaryOp::Or) {
            Value l = eval(e->lhs, env, read_state);
            // three-valued logic with short circuit
            if (e->bop == BinaryOp::And) {
                if (!l.is_null() && !truthy(l))
                    return Value::integer(0);
                Value r = eval(e->rhs, env, read_state);
                if (!r.is_null() && !truthy(r))
                    return Value::integer(0);
                if (l.is_null() || r.is_null())
                    return Value::null();
                return Value::integer(1);
            }
            if (!l.is_null() && truthy(l))
                return Value::integer(1);
            Value r = eval(e->rhs, env, read_state);
            if (!r.is_null() && truthy(r))
                return Value::integer(1);
            if (l.is_null() || r.is_null())
                return Value::null();
            return Value::integer(0);
        }

        Value l = eval(e->lhs, env, read_state);
        Value r = eval(e->rhs, env, read_state);
        switch (e->bop) {
        case BinaryOp::Add:
        case BinaryOp::Sub:
        case BinaryOp::Mul:
        case BinaryOp::Div: {
            if (l.is_null() || r.is_null())
                return Value::null();
            if (!l.is_numeric() || !r.is_numeric())
                throw Error::db("arithmetic requires numeric operands");
            if (e->bop == BinaryOp::Div) {
                double d = r.as_real();
                if (d == 0.0)
                    throw Error::db("division by zero");
                return Value::real(l.as_real() / d);
            }
            if (l.is_integer() && r.is_integer()) {
                int64_t a = l.as_integer(), b = r.as_integer();
                switch (e->bop) {
                case BinaryOp::Add: return Value::integer(a + b);
                case BinaryOp::Sub: return Value::integer(a - b);
                default: return Value::integer(a * b);
                }
            }
            double a = l.as_real(), b = r.as_real();
            switch (e->bop) {
            case BinaryOp::Add: return Value::real(a + b);
            case BinaryOp::Sub: return Value::real(a - b);
            default: return Value::real(a * b);
            }
        }
        default: {
            auto c = l.compare(r);
            if (!c)
                return Value::null();
            bool res = false;
            switch (e->bop) {
            case BinaryOp::Eq: res = *c == 0; break;
            case BinaryOp::Ne: res = *c != 0; break;
            case BinaryOp::Lt: res = *c < 0; break;
            case BinaryOp::Le: res = *c <= 0; break;
            case BinaryOp::Gt: res = *c > 0; break;
            case BinaryOp::Ge: res = *c >= 0; break;
            default: break;
            }
            return Value::integer(res ? 1 : 0);
        }
        }
    }

    Value eval_func(const sql::ExprPtr& e, const Env* env, const State* read_state) {
        const std::string& f = e->func;
        if (f == "count" || f == "sum" || f == "avg" || f == "min" || f == "max")
            throw Error::db("aggregate function " + f + "() used outside of a grouped query");
        if (f == "pg_trigger_depth")
            return Value::integer(db_.trigger_depth_);
        if (f == "round") {
            if (e->args.empty() || e->args.size() > 2)
                throw Error::db("round() takes one or two arguments");
            Value v = eval(e->args[0], env, read_state);
            if (v.is_null())
                return v;
            if (!v.is_numeric())
                throw Error::db("round() requires a numeric argument");
            int scale = 0;
            if (e->args.size() == 2) {
                Value s = eval(e->args[1], env, read_state);
                scale = static_cast<int>(s.as_integer());
            }
            return Value::real(std::stod(round_to_scale(v.as_real(), scale)));
        }
        if (f == "abs") {
            Value v = eval(e->args.at(0), env, read_state);
            if (v.is_null())
                return v;
            if (v.is_integer())
                return Value::integer(std::llabs(v.as_integer()));
            return Value::real(std::fabs(v.as_real()));
        }
        if (f == "coalesce") {
            for (const auto& arg : e->args) {
                Value v = eval(arg, env, read_state);
                if (!v.is_null())
                    return v;
            }
            return Value::null();
        }
        if (f == "length") {
            Value v = eval(e->args.at(0), env, read_state);
            if (v.is_null())
                return v;
            return Value::integer(static_cast<int64_t>(v.as_text().size()));
        }
        throw Error::db("unknown function: " + f + "()");
    }

    Value eval_grouped(const sql::ExprPtr& e, const std::vector<Scope>& rows, const Env* outer,
                       const State* read_state) {
        using sql::ExprKind;
        if (e->kind == ExprKind::FuncCall &&
            (e->func == "count" || e->func == "sum" || e->func == "avg" || e->func == "min" ||
             e->func == "max")) {
            return eval_aggregate(e, rows, outer, read_state);
        }
        switch (e->kind) {
        case ExprKind::Literal:
            return e->value;
        case ExprKind::Unary: {
            auto inner = eval_grouped(e->operand, rows, outer, read_state);
            if (inner.is_null())
                return inner;
            if (e->uop == sql::UnaryOp::Neg)
                return inner.is_integer() ? Value::integer(-inner.as_integer())
                                          : Value::real(-inner.as_real());
            return Value::integer(truthy(inner) ? 0 : 1);
        }
        case ExprKind::Binary: {
            auto node = std::make_shared<sql::Expr>(*e);
            // Evaluate grouped children into literals, then reuse scalar eval.
            Value l = eval_grouped(e->lhs, rows, outer, read_state);
            Value r = eval_grouped(e->rhs, rows, outer, read_state);
            node->lhs = sql::make_literal(l, "", l.is_text());
            node->rhs = sql::make_literal(r, "", r.is_text());
            return eval(node, outer, read_state);
        }
        case ExprKind::FuncCall: {
            auto node = std::make_shared<sql::Expr>(*e);
            node->args.clear();
            for (const auto& arg : e->args) {
                Value v = eval_grouped(arg, rows, outer, read_state);
                node->args.push_back(sql::make_literal(v, "", v.is_text()));
            }
            return eval_func(node, outer, read_state);
        }
        default: {
            // plain column in a grouped query: evaluate on the first row
            if (rows.empty())
                return Value::null();
            Env env;
            env.parent = outer;
            env.scope = rows.front();
            return eval(e, &env, read_state);
        }
        }
    }

    Value eval_aggregate(const sql::ExprPtr& e, const std::vector<Scope>& rows, const Env* outer,
                         const State* read_state) {
        int64_t count = 0;
        double sum = 0;
        int64_t isum = 0;
        bool all_int = true;
        bool any = false;
        Value best;
        for (const auto& sc : rows) {
            Env env;
            env.parent = outer;
            env.scope = sc;
            if (e->filter_where) {
                Value keep = eval(e->filter_where, &env, read_state);
                if (!truthy(keep))
                    continue;
            }
            if (e->func == "count") {
                if (e->star) {
                    ++count;
                    continue;
                }
                Value v = eval(e->args.at(0), &env, read_state);
                if (!v.is_null())
                    ++count;
                continue;
            }
            Value v = eval(e->args.at(0), &env, read_state);
            if (v.is_null())
                continue;
            any = true;
            if (e->func == "min" || e->func == "max") {
                if (best.is_null()) {
                    best = v;
                } else {
                    auto c = v.compare(best);
                    if (c && ((e->func == "min" && *c < 0) || (e->func == "max" && *c > 0)))
                        best = v;
                }
                continue;
            }
            if (!v.is_numeric())
                throw Error::db(e->func + "() requires numeric input");
            ++count;
            sum += v.as_real();
            if (v.is_integer())
                isum += v.as_integer();
            else
                all_int = false;
        }
        if (e->func == "count")
            return Value::integer(count);
        if (e->func == "min" || e->func == "max")
            return best; // NULL over empty input
        if (!any)
            return Value::null();
        if (e->func == "sum")
            return all_int ? Value::integer(isum) : Value::real(sum);
        return Value::real(sum / static_cast<double>(count));
    }

    Value scalar_subquery(const sql::SelectStmt& s, const Env* env, const State* read_state) {
        ResultSet rs = select(s, env, read_state);
        if (rs.columns.size() != 1)
            throw Error::db("subquery used as an expression must return one column");
        if (rs.rows.empty())
            return Value::null();
        if (rs.rows.size() > 1)
            throw Error::db("more than one row returned by a subquery used as an expression");
        return rs.rows[0][0];
    }

    Value coerce(const Value& v, const ColumnDef& col, const std::string& table) {
        if (v.is_null()) {
            if (!col.nullable)
                throw Error::db("null value in column " + table + "." + col.name +
                                " violates not-null constraint");
            return v;
        }
        if (col.type_name == "INTEGER" || col.type_name == "SERIAL") {
            if (v.is_integer())
                return v;
            if (v.is_real()) {
                double d = v.as_real();
                if (d == std::floor(d))
                    return Value::integer(static_cast<int64_t>(d));
            }
            throw Error::db("invalid input for integer column " + table + "." + col.name);
        }
        if (col.type_name == "NUMERIC" || col.type_name == "DECIMAL") {
            if (v.is_numeric())
                return v;
            throw Error::db("invalid input for numeric column " + table + "." + col.name);
        }
        if (col.type_name == "JSONB") {
            if (!v.is_text())
                throw Error::db("invalid input for jsonb column " + table + "." + col.name);
            return Value::text(canonical_jsonb(v.as_text()));
        }
        // VARCHAR / TEXT
        if (!v.is_text())
            throw Error::db("invalid input for text column " + table + "." + col.name +
                            " (explicit cast required)");
        if (col.type_name == "VARCHAR" && col.length &&
            v.as_text().size() > static_cast<size_t>(*col.length))
            throw Error::db("value too long for " + col.sql_type + " in " + table + "." + col.name);
        return v;
    }

    int64_t insert(const sql::InsertStmt& ins) {
        StoredTable* table = find_table_mut(db_.state_, ins.table);
        if (!table)
            throw Error::db("relation does not exist: " + ins.table);
        std::vector<int> targets;
        if (ins.columns.empty()) {
            for (size_t i = 0; i < table->schema.columns.size(); ++i)
                targets.push_back(static_cast<int>(i));
        } else {
            for (const auto& c : ins.columns) {
                int idx = table->schema.column_index(c);
                if (idx < 0)
                    throw Error::db("column does not exist: " + ins.table + "." + c);
                targets.push_back(idx);
            }
        }
        State snapshot = db_.state_;
        for (const auto& row_exprs : ins.rows) {
            if (row_exprs.size() != targets.size())
                throw Error::db("INSERT has " + std::to_string(row_exprs.size()) +
                                " values for " + std::to_string(targets.size()) + " columns");
            Row row(table->schema.columns.size(), Value::null());
            for (size_t i = 0; i < targets.size(); ++i) {
                Value v = eval(row_exprs[i], nullptr, &snapshot);
                const ColumnDef& col = table->schema.columns[static_cast<size_t>(targets[i])];
                if (v.is_null() && col.type_name == "SERIAL")
                    v = Value::integer(table->serial_next);
                row[static_cast<size_t>(targets[i])] = coerce(v, col, ins.table);
            }
            // fill omitted SERIAL columns
            for (size_t i = 0; i < table->schema.columns.size(); ++i) {
                const ColumnDef& col = table->schema.columns[i];
                if (row[i].is_null() && col.type_name == "SERIAL")
                    row[i] = Value::integer(table->serial_next);
                if (row[i].is_null() && !col.nullable)
                    throw Error::db("null value in column " + ins.table + "." + col.name +
                                    " violates not-null constraint");
                if (col.type_name == "SERIAL" && row[i].is_integer())
                    table->serial_next = std::max(table->serial_next, row[i].as_integer() + 1);
            }
            if (!table->schema.primary_key.empty()) {
                std::vector<std::string> key = pk_key(table->schema, row);
                for (const auto& existing : table->rows)
                    if (pk_key(table->schema, existing) == key)
                        throw Error::db("duplicate key value violates primary key of " + ins.table);
            }
            table->rows.push_back(std::move(row));
        }
        return static_cast<int64_t>(ins.rows.size());
    }

    static std::vector<std::string> pk_key(const TableSchema& schema, const Row& row) {
        std::vector<std::string> key;
        for (const auto& k : schema.primary_key) {
            int idx = schema.column_index(k);
            key.push_back(canonical_text(row[static_cast<size_t>(idx)], std::nullopt));
        }
        return key;
    }

    ExecResult create_table(const sql::CreateTableStmt& ct) {
        if (find_table(db_.state_, ct.name)) {
            if (ct.if_not_exists) {
                ExecResult r;
                r.kind = ExecResult::Kind::Ddl;
                return r;
            }
            throw Error::db("relation already exists: " + ct.name);
        }
        StoredTable t;
        t.schema = table_from_ast(ct);
        db_.state_.tables.push_back(std::move(t));
        ExecResult r;
        r.kind = ExecResult::Kind::Ddl;
        return r;
    }

    ExecResult create_function(const sql::CreateFunctionStmt& fn) {
        for (auto& f : db_.state_.functions) {
            if (f.def.name == fn.name) {
                if (!fn.or_replace)
                    throw Error::db("function already exists: " + fn.name);
                f.def = fn;
                ExecResult r;
                r.kind = ExecResult::Kind::Ddl;
                return r;
            }
        }
        db_.state_.functions.push_back({fn});
        ExecResult r;
        r.kind = ExecResult::Kind::Ddl;
        return r;
    }

    ExecResult create_trigger(const sql::CreateTriggerStmt& tr) {
        if (tr.timing != "after" || tr.event != "update" || !tr.for_each_row)
            throw Error::db("only row-level AFTER UPDATE triggers are supported");
        if (!find_table(db_.state_, tr.table))
            throw Error::db("relation does not exist: " + tr.table);
        bool fn_found = false;
        for (const auto& f : db_.state_.functions)
            if (f.def.name == tr.function_name)
                fn_found = true;
        if (!fn_found)
            throw Error::db("function does not exist: " + tr.function_name);
        for (const auto& t : db_.state_.triggers)
            if (t.def.name == tr.name && t.def.table == tr.table)
                throw Error::db("trigger already exists: " + tr.name + " on " + tr.table);
        for (const auto& c : tr.of_columns) {
            const StoredTable* table = find_table(db_.state_, tr.table);
            if (table->schema.column_index(c) < 0)
                throw Error::db("column does not exist: " + tr.table + "." + c);
        }
        db_.state_.triggers.push_back({tr});
        ExecResult r;
        r.kind = ExecResult::Kind::Ddl;
        return r;
    }

    ExecResult drop_trigger(const sql::DropTriggerStmt& d) {
        auto& triggers = db_.state_.triggers;
        auto it = std::find_if(triggers.begin(), triggers.end(), [&](const auto& t) {
            return t.def.name == d.name && t.def.table == d.table;
        });
        if (it == triggers.end()) {
            if (!d.if_exists)
                throw Error::db("trigger does not exist: " + d.name + " on " + d.table);
        } else {
            triggers.erase(it);
        }
        ExecResult r;
        r.kind = ExecResult::Kind::Ddl;
        return r;
    }

    ExecResult drop_function(const sql::DropFunctionStmt& d) {
        auto& functions = db_.state_.functions;
        auto it = std::find_if(functions.begin(), functions.end(),
                               [&](const auto& f) { return f.def.name == d.name; });
        if (it == functions.end()) {
            if (!d.if_exists)
                throw Error::db("function does not exist: " + d.name);
        } else {
            functions.erase(it);
        }
        ExecResult r;
        r.kind = ExecResult::Kind::Ddl;
        return r;
    }

    void fire_trigger(const Database::TriggerRecord& tr, const TableSchema& schema, const Row& old_row,
                      const Row& new_row) {
        Env env;
        env.old_row = &old_row;
        env.new_row = &new_row;
        env.trigger_schema = &schema;
        if (tr.def.when) {
            Value keep = eval(tr.def.when, &env, &db_.state_);
            if (!truthy(keep))
                return;
        }
        const sql::CreateFunctionStmt* fn = nullptr;
        for (const auto& f : db_.state_.functions)
            if (f.def.name == tr.def.function_name)
                fn = &f.def;
        if (!fn)
            throw Error::db("trigger function vanished: " + tr.def.function_name);
        if (db_.trigger_depth_ >= 16)
            throw Error::db("trigger recursion depth exceeded");
        ++db_.trigger_depth_;
        try {
            run_body(fn->body, env);
        } catch (...) {
            --db_.trigger_depth_;
            throw;
        }
        --db_.trigger_depth_;
    }

    // returns true when a RETURN was executed
    bool run_body(const sql::PlBody& body, Env& env) {
        for (const auto& st : body) {
            switch (st.kind) {
            case sql::PlStmt::Kind::If: {
                Value cond = eval(st.cond, &env, &db_.state_);
                const sql::PlBody* branch = truthy(cond) ? st.then_branch.get()
                                                         : st.else_branch.get();
                if (branch && run_body(*branch, env))
                    return true;
                break;
            }
            case sql::PlStmt::Kind::Update:
                update(*st.update, &env);
                break;
            case sql::PlStmt::Kind::Return:
                return true;
            }
        }
        return false;
    }
};

// ---------------------------------------------------------------------------
// Database
// ---------------------------------------------------------------------------

ExecResult Database::exec(const std::string& sql_text) {
    return exec(sql::parse_single(sql_text));
}

std::vector<ExecResult> Database::exec_script(const std::string& sql_text) {
    std::vector<ExecResult> out;
    for (const auto& stmt : sql::parse_script(sql_text))
        out.push_back(exec(stmt));
    return out;
}

ExecResult Database::exec(const sql::Statement& stmt) {
    Executor ex(*this);
    return ex.exec(stmt, nullptr);
}

ResultSet Database::query(const sql::SelectStmt& select) const {
    Executor ex(const_cast<Database&>(*this));
    return ex.select(select, nullptr, &state_);
}

void Database::begin() {
    if (backup_)
        throw Error::db("transaction already open");
    backup_ = state_;
}

void Database::commit() {
    if (!backup_)
        throw Error::db("no transaction is open");
    backup_.reset();
}

void Database::rollback() {
    if (!backup_)
        throw Error::db("no transaction is open");
    state_ = std::move(*backup_);
    backup_.reset();
}

Database Database::clone() const {
    if (backup_)
        throw Error::db("cannot clone a database with an open transaction");
    Database copy(dialect_);
    copy.state_ = state_;
    return copy;
}

const TableSchema* Database::table_schema(const std::string& name) const {
    for (const auto& t : state_.tables)
        if (t.schema.name == name)
            return &t.schema;
    return nullptr;
}

std::vector<std::string> Database::table_names() const {
    std::vector<std::string> out;
    for (const auto& t : state_.tables)
        out.push_back(t.schema.name);
    return out;
}

const std::vector<std::vector<Value>>* Database::table_rows(const std::string& name) const {
    for (const auto& t : state_.tables)
        if (t.schema.name == name)
            return &t.rows;
    return nullptr;
}

} // namespace castle::engine
