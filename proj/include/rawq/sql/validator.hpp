#pragma once

#include <string>
#include <vector>

#include "rawq/catalog.hpp"
#include "rawq/sql/ast.hpp"

namespace rawq::sql {

// Equi-join predicate between two distinct FROM tables. Sides keep the FROM
// order of the underlying Cmp after normalization (left = lower table index).
struct JoinPred {
  int left_table = 0;
  uint32_t left_ord = 0;
  ColumnType left_type = ColumnType::Int32;
  bool left_nullable = false;
  int right_table = 0;
  uint32_t right_ord = 0;
  ColumnType right_type = ColumnType::Int32;
  bool right_nullable = false;
};

// Resolution result. Owns the AST; `filters` and select items borrow nodes
// from it, so the struct is move-only and pointers stay valid across moves.
struct ValidatedQuery {
  std::vector<std::string> tables;  // canonical catalog names, FROM order
  QueryAst ast;                     // fully resolved; SELECT * expanded
  bool aggregate = false;           // every select item is a SUM

  std::vector<std::string> output_names;
  std::vector<ColumnType> output_types;

  std::vector<std::vector<const Expr*>> filters;  // [table] -> conjuncts
  std::vector<JoinPred> join_preds;
  std::vector<std::vector<uint32_t>> projection;  // [table] -> sorted ordinals

  ValidatedQuery() = default;
  ValidatedQuery(ValidatedQuery&&) = default;
  ValidatedQuery& operator=(ValidatedQuery&&) = default;
  ValidatedQuery(const ValidatedQuery&) = delete;
  ValidatedQuery& operator=(const ValidatedQuery&) = delete;
};

// Type of a resolved value expression (no Cmp/Between/And nodes).
ColumnType expr_type(const Expr& e);

// Resolves names against the catalog, classifies WHERE conjuncts into
// per-table filters and equi-join predicates, computes projections, and type
// checks. Throws Error(User) on unknown names, ambiguity, or type mismatch.
ValidatedQuery validate(QueryAst ast, const Catalog& catalog);

}  // namespace rawq::sql
