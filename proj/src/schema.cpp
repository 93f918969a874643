#include "castle/schema.hpp"

#include <algorithm>
#include <set>

#include "castle/csv.hpp"
#include "castle/error.hpp"

namespace castle {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

} // namespace

const ColumnDef* TableSchema::find_column(const std::string& name) const {
    for (const auto& c : columns)
        if (c.name == name)
            return &c;
    return nullptr;
}

int TableSchema::column_index(const std::string& name) const {
    for (size_t i = 0; i < columns.size(); ++i)
        if (columns[i].name == name)
            return static_cast<int>(i);
    return -1;
}

std::vector<std::string> TableSchema::derived_columns() const {
    std::vector<std::string> out;
    for (const auto& c : columns)
        if (c.role == ColumnRole::DerivedAggregate)
            out.push_back(c.name);
    return out;
}

const TableSchema* SchemaCatalog::find_table(const std::string& name) const {
    for (const auto& t : tables)
        if (t.name == name)
            return &t;
    return nullptr;
}

const TableSchema& SchemaCatalog::require_table(const std::string& name) const {
    const TableSchema* t = find_table(name);
    if (!t)
        throw Error::data("unknown table: " + name);
    return *t;
}

const AggregationRule* SchemaCatalog::rule_for(const std::string& table,
                                               const std::string& column) const {
    for (const auto& r : rules)
        if (r.table == table && r.column == column)
            return &r;
    return nullptr;
}

TableSchema table_from_ast(const sql::CreateTableStmt& ct) {
    TableSchema table;
    table.name = ct.name;
    std::set<std::string> seen;
    for (const auto& col : ct.columns) {
        if (!seen.insert(col.name).second)
            throw Error::parse("duplicate column name: " + ct.name + "." + col.name);
        ColumnDef def;
        def.name = col.name;
        def.type_name = col.type_name;
        def.length = col.length;
        def.precision = col.precision;
        def.scale = col.scale;
        def.nullable = !col.not_null && !col.inline_pk;
        if (col.type_name == "VARCHAR") {
            def.sql_type = "VARCHAR(" + std::to_string(*col.length) + ")";
        } else if (col.type_name == "DECIMAL") {
            def.sql_type =
                "DECIMAL(" + std::to_string(*col.precision) + "," + std::to_string(*col.scale) + ")";
        } else if (col.type_name == "NUMERIC" && col.precision) {
            def.sql_type = "NUMERIC(" + std::to_string(*col.precision) +
                           (col.scale ? "," + std::to_string(*col.scale) : "") + ")";
        } else {
            def.sql_type = col.type_name;
        }
        table.columns.push_back(std::move(def));
    }
    for (const auto& k : ct.primary_key) {
        if (!table.find_column(k))
            throw Error::parse("primary key names unknown column: " + ct.name + "." + k);
    }
    table.primary_key = ct.primary_key;
    return table;
}

SchemaCatalog load_schema(const std::string& ddl_text, Dialect dialect) {
    SchemaCatalog catalog;
    catalog.dialect = dialect;
    auto statements = sql::parse_script(ddl_text);
    for (const auto& stmt : statements) {
        const auto* ct = stmt.as<sql::CreateTableStmt>();
        if (!ct)
            throw Error::parse("schema input may contain only CREATE TABLE statements");
        if (catalog.find_table(ct->name))
            throw Error::parse("duplicate table name: " + ct->name);
        catalog.tables.push_back(table_from_ast(*ct));
    }
    return catalog;
}

SchemaCatalog annotate_roles(const SchemaCatalog& catalog,
                             const std::vector<AggregationRule>& rules) {
    SchemaCatalog out = catalog;
    for (const auto& rule : rules) {
        TableSchema* table = nullptr;
        for (auto& t : out.tables)
            if (t.name == rule.table)
                table = &t;
        if (!table)
            throw Error::data("aggregation rule names unknown table: " + rule.table);
        bool found = false;
        for (auto& c : table->columns) {
            if (c.name == rule.column) {
                c.role = ColumnRole::DerivedAggregate;
                found = true;
            }
        }
        if (!found)
            throw Error::data("aggregation rule names unknown column: " + rule.table + "." +
                              rule.column);
        if (rule.kind == RuleKind::Group && !table->find_column(rule.group_by))
            throw Error::data("aggregation rule group key names unknown column: " + rule.table +
                              "." + rule.group_by);
        out.rules.push_back(rule);
    }
    return out;
}

std::string render_schema_prompt(const SchemaCatalog& catalog, const std::string& table_name) {
    const TableSchema& table = catalog.require_table(table_name);
    std::string out = "CREATE TABLE IF NOT EXISTS " + table.name + " (\n";
    bool inline_pk = table.primary_key.size() == 1;
    size_t n = table.columns.size();
    for (size_t i = 0; i < n; ++i) {
        const ColumnDef& c = table.columns[i];
        out += "    " + c.name + " " + c.sql_type;
        if (inline_pk && c.name == table.primary_key.front())
            out += " PRIMARY KEY";
        else if (!c.nullable)
            out += " NOT NULL";
        bool last = (i + 1 == n) && (inline_pk || table.primary_key.empty());
        out += last ? "\n" : ",\n";
    }
    if (!inline_pk && !table.primary_key.empty()) {
        out += "    PRIMARY KEY(";
        for (size_t i = 0; i < table.primary_key.size(); ++i) {
            if (i)
                out += ", ";
            out += table.primary_key[i];
        }
        out += ")\n";
    }
    out += ");\n";
    return out;
}

AggregationRule parse_rule(const std::string& table, const std::string& column,
                           const std::string& rule_text) {
    AggregationRule rule;
    rule.table = table;
    rule.column = column;
    rule.raw = rule_text;

    const std::string lowered = lower(rule_text);
    if (lowered.rfind("external:", 0) == 0) {
        rule.kind = RuleKind::External;
        rule.note = rule_text.substr(9);
        while (!rule.note.empty() && rule.note.front() == ' ')
            rule.note.erase(rule.note.begin());
        return rule;
    }

    size_t gb = lowered.rfind(" group by ");
    if (gb != std::string::npos) {
        rule.kind = RuleKind::Group;
        rule.expr = sql::parse_expression(rule_text.substr(0, gb));
        std::string key = rule_text.substr(gb + 10);
        // trim
        key.erase(0, key.find_first_not_of(" \t\r\n"));
        key.erase(key.find_last_not_of(" \t\r\n") + 1);
        rule.group_by = sql::fold_identifier(key);
        if (rule.group_by.empty())
            throw Error::data("aggregation rule missing group key: " + rule_text);
        if (!sql::contains_aggregate(rule.expr))
            throw Error::data("grouped rule has no aggregate function: " + rule_text);
        return rule;
    }

    rule.kind = RuleKind::Row;
    rule.expr = sql::parse_expression(rule_text);
    if (sql::contains_aggregate(rule.expr))
        throw Error::data("aggregate rule requires a GROUP BY key: " + rule_text);
    return rule;
}

namespace {

std::vector<AggregationRule> rules_from_table(const csv::Table& t) {
    int ti = t.column("table"), ci = t.column("column"), ri = t.column("rule");
    if (ti < 0 || ci < 0 || ri < 0)
        throw Error::data("annotation sidecar must have columns: table, column, rule");
    std::vector<AggregationRule> out;
    for (const auto& row : t.rows)
        out.push_back(parse_rule(row[ti], row[ci], row[ri]));
    return out;
}

} // namespace

std::vector<AggregationRule> parse_annotation_rules(const std::string& csv_text) {
    return rules_from_table(csv::parse(csv_text));
}

std::vector<AggregationRule> load_annotation_rules(const std::string& path) {
    return rules_from_table(csv::read_file(path));
}

} // namespace castle
