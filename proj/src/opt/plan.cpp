#include "rawq/opt/plan.hpp"

#include "rawq/error.hpp"

namespace rawq::opt {
namespace {

int lower_node(const JoinTreeNode& node, PhysicalPlan& plan) {
  if (node.is_leaf()) {
    PhysOp op;
    op.kind = PhysOp::Kind::Scan;
    op.table_idx = node.leaf;
    op.projection = plan.vq.projection[node.leaf];
    op.filters = plan.vq.filters[node.leaf];
    op.est_rows = node.est_rows;
    op.est_cost = 0;
    op.id = static_cast<int>(plan.chain.size());
    plan.chain.push_back(std::move(op));
    return plan.chain.back().id;
  }
  int l = lower_node(*node.build, plan);
  int r = lower_node(*node.probe, plan);
  PhysOp op;
  op.kind = PhysOp::Kind::HashJoin;
  op.join = &node;
  op.inputs = {l, r};
  op.est_rows = node.est_rows;
  op.est_cost = node.cumulative_cost;
  op.id = static_cast<int>(plan.chain.size());
  plan.chain.push_back(std::move(op));
  return plan.chain.back().id;
}

std::string filters_text(const std::vector<const sql::Expr*>& filters) {
  std::string out;
  for (const sql::Expr* f : filters) {
    out += out.empty() ? " filter=(" : " and ";
    out += sql::print(*f);
  }
  if (!out.empty()) out += ')';
  return out;
}

void explain_node(const PhysicalPlan& plan, const Catalog& catalog,
                  const JoinTreeNode& node, int depth, std::string& out) {
  out.append(static_cast<size_t>(depth) * 2, ' ');
  if (node.is_leaf()) {
    int t = node.leaf;
    const TableDef& def = catalog.table(plan.vq.tables[t]);
    out += "SCAN " + def.name + " cols=(";
    bool first = true;
    for (uint32_t ord : plan.vq.projection[t]) {
      if (!first) out += ", ";
      first = false;
      out += def.columns[ord].name;
    }
    out += ')';
    out += filters_text(plan.vq.filters[t]);
    out += " [rows=" + std::to_string(node.est_rows) + ", cost=0]\n";
    return;
  }
  if (node.edges.empty()) {
    out += "CROSS JOIN";
  } else {
    out += "HASH JOIN ";
    bool first = true;
    for (int ei : node.edges) {
      // Edge indices were built from join_preds in order.
      const sql::JoinPred& jp = plan.vq.join_preds[ei];
      if (!first) out += " and ";
      first = false;
      const TableDef& lt = catalog.table(plan.vq.tables[jp.left_table]);
      const TableDef& rt = catalog.table(plan.vq.tables[jp.right_table]);
      out += lt.name + "." + lt.columns[jp.left_ord].name + " = " + rt.name +
             "." + rt.columns[jp.right_ord].name;
    }
  }
  out += " [rows=" + std::to_string(node.est_rows) +
         ", cost=" + std::to_string(node.cumulative_cost) + "]\n";
  explain_node(plan, catalog, *node.build, depth + 1, out);
  explain_node(plan, catalog, *node.probe, depth + 1, out);
}

}  // namespace

PhysicalPlan build_plan(sql::ValidatedQuery vq, JoinTree tree) {
  if (!tree.root) throw_internal("build_plan on empty tree");
  PhysicalPlan plan;
  plan.vq = std::move(vq);
  plan.tree = std::move(tree);

  int root = lower_node(*plan.tree.root, plan);
  uint64_t total_cost = plan.tree.root->cumulative_cost;

  PhysOp shape;
  shape.kind = plan.vq.aggregate ? PhysOp::Kind::Aggregate : PhysOp::Kind::Project;
  shape.inputs = {root};
  shape.est_rows = plan.vq.aggregate ? 1 : plan.tree.root->est_rows;
  shape.est_cost = total_cost;
  shape.id = static_cast<int>(plan.chain.size());
  plan.chain.push_back(std::move(shape));

  PhysOp out;
  out.kind = PhysOp::Kind::Output;
  out.inputs = {plan.chain.back().id};
  out.est_rows = plan.chain.back().est_rows;
  out.est_cost = total_cost;
  out.id = static_cast<int>(plan.chain.size());
  plan.chain.push_back(std::move(out));
  return plan;
}

std::string explain(const PhysicalPlan& plan, const Catalog& catalog) {
  std::string out;
  uint64_t total_cost = plan.tree.root->cumulative_cost;
  const PhysOp& shape = plan.chain[plan.chain.size() - 2];

  out += "OUTPUT [rows=" + std::to_string(plan.output().est_rows) +
         ", cost=" + std::to_string(total_cost) + "]\n";
  if (shape.kind == PhysOp::Kind::Aggregate) {
    out += "  AGGREGATE ";
  } else {
    out += "  PROJECT ";
  }
  bool first = true;
  for (const auto& name : plan.vq.output_names) {
    if (!first) out += ", ";
    first = false;
    out += name;
  }
  out += " [rows=" + std::to_string(shape.est_rows) +
         ", cost=" + std::to_string(total_cost) + "]\n";
  explain_node(plan, catalog, *plan.tree.root, 2, out);
  return out;
}

}  // namespace rawq::opt
