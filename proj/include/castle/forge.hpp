#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "castle/dialect.hpp"
#include "castle/schema.hpp"
#include "castle/sql.hpp"

namespace castle::forge {

enum class AssignKind {
    Literal,
    Subquery,
    Placeholder,
    ArithmeticOnSelf, // col = col +/- operand, operand literal or subquery
};

struct Assignment {
    std::string column;
    AssignKind kind = AssignKind::Literal;
    sql::ExprPtr value;          // literal expr / subquery expr / placeholder
    sql::BinaryOp arith_op{};    // ArithmeticOnSelf only
    sql::ExprPtr arith_operand;  // ArithmeticOnSelf only
};

struct UpdateSkeleton {
    std::string table;
    std::vector<Assignment> assignments;
    sql::ExprPtr where;

    const Assignment* find(const std::string& column) const;
    sql::UpdateStmt to_update() const;
    bool equals(const UpdateSkeleton& other) const;
};

enum class CardinalityEvidence {
    LimitOneClause,
    ScalarAggregate,
    UniqueKeyEquality,
};

struct ValidationReport {
    bool accepted = false;
    std::optional<CardinalityEvidence> evidence;
    std::string reason; // set when rejected
};

std::string_view evidence_name(CardinalityEvidence e);

struct SubqueryPlan {
    std::string column;
    sql::SelectPtr select;
    std::optional<CardinalityEvidence> cardinality_evidence;
};

// Values extracted from the instruction facts; a SET literal is traceable to
// the instruction iff its normalized text appears here.
class FactIndex {
public:
    void add(const std::string& fact_value);
    bool matches(const std::string& literal_text) const;
    static std::string normalize(const std::string& s);

private:
    std::set<std::string> values_;
};

struct UpdateTargetSet {
    std::vector<std::string> direct;
    std::vector<std::string> cascade;
    std::vector<std::string> derived;

    size_t size() const { return direct.size() + cascade.size() + derived.size(); }
    bool in_direct(const std::string& c) const;
    bool in_cascade(const std::string& c) const;
    bool in_derived(const std::string& c) const;
};

struct Resolution {
    AssignKind kind = AssignKind::Literal; // Literal or Subquery
    sql::ExprPtr literal;
    sql::SelectPtr select;
    bool validated = false; // subquery resolutions must carry a passed validation
};

struct ComposedUpdate {
    UpdateSkeleton skeleton; // fully resolved: no placeholders
    Dialect dialect = Dialect::Postgresql;
    std::string sql_text;
};

// Parses a single UPDATE statement into a skeleton. Rejects non-UPDATE input,
// multiple statements, and WHERE-less updates (policy: unbounded update).
UpdateSkeleton parse_update(const std::string& sql_text, Dialect dialect);

// Syntactic cardinality proof. ACCEPT iff one of:
//   (a) the outermost query carries the dialect's scalar-limit clause with
//       bound 1 (LIMIT 1 on postgresql/mysql, TOP 1 on sqlserver);
//   (b) the single projection is an aggregate and there is no GROUP BY;
//   (c) the WHERE clause equates the full primary key of the FROM table to
//       constants.
// Unknown tables/columns are errors, not rejections. `outer_table` names the
// update target so correlated references resolve.
ValidationReport validate_subquery(const SubqueryPlan& plan, Dialect dialect,
                                   const SchemaCatalog& catalog,
                                   const std::string& outer_table = "");

// Partitions assignments into direct / cascade / derived. Derived-aggregate
// columns win regardless of value shape; literals traceable to instruction
// facts are direct; everything else cascades.
UpdateTargetSet classify_assignments(const UpdateSkeleton& skeleton, const FactIndex& facts,
                                     const SchemaCatalog& catalog);

// Substitutes placeholder resolutions and renders the final statement for the
// dialect. The rendered text is reparsed and checked equal to the resolved
// skeleton before returning.
ComposedUpdate compose_update(const UpdateSkeleton& skeleton,
                              const std::map<std::string, Resolution>& resolved, Dialect dialect);

} // namespace castle::forge
