#pragma once

#include <optional>
#include <string>
#include <vector>

#include "castle/dialect.hpp"
#include "castle/sql.hpp"

namespace castle {

enum class ColumnRole {
    Base,
    DerivedAggregate,
};

struct ColumnDef {
    std::string name;
    std::string sql_type;  // canonical declared type text, e.g. VARCHAR(100)
    std::string type_name; // SERIAL, VARCHAR, TEXT, NUMERIC, DECIMAL, INTEGER, JSONB
    std::optional<int> length;
    std::optional<int> precision;
    std::optional<int> scale; // decimal digits, drives value canonicalization
    bool nullable = true;
    ColumnRole role = ColumnRole::Base;

    bool is_numeric_type() const {
        return type_name == "SERIAL" || type_name == "NUMERIC" || type_name == "DECIMAL" ||
               type_name == "INTEGER";
    }
    bool is_integer_type() const { return type_name == "SERIAL" || type_name == "INTEGER"; }
};

struct TableSchema {
    std::string name;
    std::vector<ColumnDef> columns;
    std::vector<std::string> primary_key;

    const ColumnDef* find_column(const std::string& name) const;
    int column_index(const std::string& name) const; // -1 when absent
    std::vector<std::string> derived_columns() const;
};

// How a derived-aggregate column is recomputed.
enum class RuleKind {
    Group,    // aggregate expression over rows sharing group_by
    Row,      // expression over sibling columns of the same row
    External, // sourced outside the table; not trigger-maintainable
};

struct AggregationRule {
    std::string table;
    std::string column;
    RuleKind kind{};
    sql::ExprPtr expr;    // Group/Row
    std::string group_by; // Group only
    std::string note;     // External only
    std::string raw;      // original rule text, used in prompts
};

struct SchemaCatalog {
    std::vector<TableSchema> tables;
    Dialect dialect = Dialect::Postgresql;
    std::vector<AggregationRule> rules;

    const TableSchema* find_table(const std::string& name) const;
    const TableSchema& require_table(const std::string& name) const;
    const AggregationRule* rule_for(const std::string& table, const std::string& column) const;
};

// Parses CREATE TABLE statements into a catalog. The grammar is deliberately
// bounded to the supported type set; anything else is a parse error.
SchemaCatalog load_schema(const std::string& ddl_text, Dialect dialect);

TableSchema table_from_ast(const sql::CreateTableStmt& ct);

// Marks rule targets as derived-aggregate. A rule naming an unknown table or
// column is rejected.
SchemaCatalog annotate_roles(const SchemaCatalog& catalog, const std::vector<AggregationRule>& rules);

// Canonical CREATE TABLE text for the prompt {schema} slot. Byte-stable.
std::string render_schema_prompt(const SchemaCatalog& catalog, const std::string& table);

// Annotation sidecar: CSV with header table,column,rule.
std::vector<AggregationRule> parse_annotation_rules(const std::string& csv_text);
std::vector<AggregationRule> load_annotation_rules(const std::string& path);

AggregationRule parse_rule(const std::string& table, const std::string& column,
                           const std::string& rule_text);

} // namespace castle
