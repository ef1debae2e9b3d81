#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "rawq/types.hpp"

namespace rawq::sql {

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };
enum class ArithOp { Add, Sub, Mul };

const char* cmp_op_text(CmpOp op);
const char* arith_op_text(ArithOp op);

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

// Column reference. The resolution fields stay unset until validation runs;
// `table` is empty for unqualified references.
struct ColumnRef {
  std::string table;
  std::string column;

  bool resolved = false;
  int table_idx = -1;  // index into ValidatedQuery::tables
  uint32_t ordinal = 0;
  ColumnType type = ColumnType::Int32;
  bool nullable = false;
};

struct IntLit {
  int64_t v = 0;
};
struct FloatLit {
  double v = 0;
};
struct TextLit {
  std::string v;
};
struct DateLit {
  int32_t days = 0;  // days since 1970-01-01
};
// INTERVAL 'n' YEAR. Only legal as the right operand of DateLit + interval;
// the parser folds that form away, so no IntervalLit survives a parse.
struct IntervalLit {
  int32_t years = 0;
};

struct Arith {
  ArithOp op;
  ExprPtr lhs, rhs;
};
struct Cmp {
  CmpOp op;
  ExprPtr lhs, rhs;
};
struct Between {
  ExprPtr expr, lo, hi;  // inclusive on both ends
};
// Conjunction of two or more predicates; WHERE with a single predicate is
// stored bare, without an And wrapper.
struct And {
  std::vector<ExprPtr> terms;
};

struct Expr {
  using Node = std::variant<ColumnRef, IntLit, FloatLit, TextLit, DateLit,
                            IntervalLit, Arith, Cmp, Between, And>;
  Node node;

  template <typename T>
  const T* get_if() const {
    return std::get_if<T>(&node);
  }
  template <typename T>
  T* get_if() {
    return std::get_if<T>(&node);
  }
  template <typename T>
  bool is() const {
    return std::holds_alternative<T>(node);
  }
};

ExprPtr make_expr(Expr::Node node);

struct SelectItem {
  ExprPtr expr;
  bool is_sum = false;  // expr is the SUM argument
  std::string alias;    // empty when no AS clause
};

struct QueryAst {
  bool select_star = false;
  std::vector<SelectItem> items;  // empty iff select_star
  std::vector<std::string> from_tables;
  ExprPtr where;  // null when absent; Cmp, Between, or And otherwise
};

// Canonical text form; parse(print(q)) reproduces the same tree.
std::string print(const Expr& e);
std::string print(const QueryAst& q);

}  // namespace rawq::sql
