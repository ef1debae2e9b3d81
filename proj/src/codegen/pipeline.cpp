#include "rawq/codegen/pipeline.hpp"

#include "rawq/error.hpp"

namespace rawq::codegen {
namespace {

// Walks the join tree depth-first. A build subtree closes its own pipeline at
// the parent's hash table; the probe subtree's stream keeps flowing upward
// and picks up one probe step per ancestor it feeds.
Pipeline walk(const opt::JoinTreeNode& node, const sql::ValidatedQuery& vq,
              std::vector<Pipeline>& out) {
  if (node.is_leaf()) {
    Pipeline p;
    p.leaf = &node;
    p.table_idx = node.leaf;
    return p;
  }
  if (!node.build || !node.probe) throw_internal("join node without children");
  Pipeline build = walk(*node.build, vq, out);
  build.sink_join = &node;
  out.push_back(std::move(build));
  Pipeline probe = walk(*node.probe, vq, out);
  probe.probes.push_back(&node);
  return probe;
}

}  // namespace

std::vector<Pipeline> split_pipelines(const opt::PhysicalPlan& plan) {
  if (!plan.tree.root) throw_internal("plan without a join tree");
  std::vector<Pipeline> out;
  Pipeline last = walk(*plan.tree.root, plan.vq, out);
  last.is_final = true;
  out.push_back(std::move(last));
  return out;
}

}  // namespace rawq::codegen
