#pragma once

#include <string>
#include <vector>

#include "rawq/opt/join_order.hpp"

namespace rawq::opt {

struct PhysOp {
  enum class Kind { Scan, HashJoin, Aggregate, Project, Output };
  Kind kind;
  int id = 0;
  std::vector<int> inputs;  // producer op ids, always earlier in the chain

  // Scan
  int table_idx = -1;
  std::vector<uint32_t> projection;
  std::vector<const sql::Expr*> filters;

  // HashJoin
  const JoinTreeNode* join = nullptr;

  uint64_t est_rows = 0;
  uint64_t est_cost = 0;  // cumulative at this operator
};

// Owns the validated query and the join tree; chain ops borrow from both,
// so the plan is move-only like ValidatedQuery.
struct PhysicalPlan {
  sql::ValidatedQuery vq;
  JoinTree tree;
  std::vector<PhysOp> chain;

  PhysicalPlan() = default;
  PhysicalPlan(PhysicalPlan&&) = default;
  PhysicalPlan& operator=(PhysicalPlan&&) = default;
  PhysicalPlan(const PhysicalPlan&) = delete;
  PhysicalPlan& operator=(const PhysicalPlan&) = delete;

  const PhysOp& output() const { return chain.back(); }
};

// Lowers a join tree to the operator chain: one SCAN per table with pushed
// filters and projections, joins bottom-up, then AGGREGATE or PROJECT, then
// OUTPUT. Tree leaf indices must equal the query's table indices.
PhysicalPlan build_plan(sql::ValidatedQuery vq, JoinTree tree);

// One operator per line, join inputs indented, every line ending
// "[rows=…, cost=…]".
std::string explain(const PhysicalPlan& plan, const Catalog& catalog);

}  // namespace rawq::opt
