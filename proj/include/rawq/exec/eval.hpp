#pragma once

#include "rawq/sql/validator.hpp"
#include "rawq/types.hpp"

namespace rawq::exec {

// Row abstraction the tree-walking evaluator reads columns through.
class ColumnSource {
 public:
  virtual ~ColumnSource() = default;
  virtual const Value& column(int table_idx, uint32_t ordinal) const = 0;
};

// Value expression over one row. NULL operands propagate to a NULL result.
// INT32 arithmetic runs in 64 bits; mixed INT32/FLOAT64 promotes to double.
Value eval_expr(const sql::Expr& e, const ColumnSource& row);

// Predicate (Cmp/Between/And). NULL operands make the predicate false.
bool eval_pred(const sql::Expr& e, const ColumnSource& row);

// Three-way comparison with numeric promotion; both sides non-null and
// type-compatible per validation.
int compare_values(const Value& a, const Value& b);

}  // namespace rawq::exec
