#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "castle/dialect.hpp"
#include "castle/schema.hpp"
#include "castle/sql.hpp"
#include "castle/value.hpp"

namespace castle::engine {

struct ResultSet {
    std::vector<std::string> columns;
    std::vector<std::vector<Value>> rows;
};

struct ExecResult {
    enum class Kind { Select, Update, Insert, Ddl, Txn } kind = Kind::Ddl;
    int64_t affected = 0;
    ResultSet result;
};

// In-process relational engine for the bounded SQL dialect used by the
// pipeline and benchmarks: CREATE TABLE / INSERT / UPDATE (with scalar
// subqueries) / SELECT (aggregates, grouping, catalog views) and row-level
// AFTER UPDATE triggers written in the restricted plpgsql subset.
//
// A Database instance is owned by exactly one worker at a time; parallel
// workers run on independent clones.
class Database {
public:
    explicit Database(Dialect dialect = Dialect::Postgresql) : dialect_(dialect) {}

    Dialect dialect() const { return dialect_; }

    ExecResult exec(const std::string& sql_text);              // single statement
    std::vector<ExecResult> exec_script(const std::string& sql_text);
    ExecResult exec(const sql::Statement& stmt);
    ResultSet query(const sql::SelectStmt& select) const;      // read-only

    void begin();
    void commit();
    void rollback();
    bool in_transaction() const { return backup_.has_value(); }

    Database clone() const;

    const TableSchema* table_schema(const std::string& name) const;
    std::vector<std::string> table_names() const;
    const std::vector<std::vector<Value>>* table_rows(const std::string& name) const;

    struct TriggerRecord {
        sql::CreateTriggerStmt def;
    };
    const std::vector<TriggerRecord>& triggers() const { return state_.triggers; }

private:
    struct StoredTable {
        TableSchema schema;
        std::vector<std::vector<Value>> rows;
        int64_t serial_next = 1;
    };
    struct FunctionRecord {
        sql::CreateFunctionStmt def;
    };
    struct State {
        std::vector<StoredTable> tables;
        std::vector<FunctionRecord> functions;
        std::vector<TriggerRecord> triggers;
    };

    friend class Executor;

    State state_;
    std::optional<State> backup_;
    Dialect dialect_;
    int trigger_depth_ = 0;
};

} // namespace castle::engine
