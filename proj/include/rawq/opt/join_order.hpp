#pragma once

#include <memory>
#include <string>
#include <vector>

#include "rawq/opt/cost_model.hpp"
#include "rawq/sql/validator.hpp"

namespace rawq::opt {

struct JoinGraph {
  struct Node {
    std::string name;     // canonical table name
    int table_idx = 0;    // index into ValidatedQuery::tables
    uint64_t base_rows = 0;
    double selectivity = 1.0;  // product over the table's filters
    uint64_t rows = 0;         // post-filter cardinality estimate
  };
  struct Edge {
    int a = 0, b = 0;  // node indices, a < b
    uint32_t a_ord = 0, b_ord = 0;
    uint64_t v_a = 1, v_b = 1;  // join-column distinct counts
    int pred_idx = 0;           // index into ValidatedQuery::join_preds
  };
  std::vector<Node> nodes;
  std::vector<Edge> edges;
};

JoinGraph build_join_graph(const sql::ValidatedQuery& vq, const Catalog& catalog,
                           const CostModelConfig& cfg);

// Binary join tree. The build (hash) side is always the left child.
struct JoinTreeNode {
  int leaf = -1;  // JoinGraph node index; -1 for internal nodes
  std::unique_ptr<JoinTreeNode> build, probe;
  std::vector<int> edges;  // graph edge indices; empty means cross product
  uint32_t mask = 0;       // graph nodes covered by this subtree
  uint64_t est_rows = 0;
  uint64_t est_cost = 0;  // this node's own cost; 0 at leaves
  uint64_t cumulative_cost = 0;

  bool is_leaf() const { return leaf >= 0; }
};

struct JoinTree {
  std::unique_ptr<JoinTreeNode> root;
};

// Cardinality of joining the node subset `mask`: product of node cardinalities
// divided by max(v) per internal edge, with one final round-up. Using a single
// canonical figure per subset keeps cost totals independent of join order, so
// exhaustive search has optimal substructure.
uint64_t subset_rows(const JoinGraph& g, uint32_t mask);

// Cost of one join under the configured algorithm; edgeless pairs are priced
// as block nested-loop cross products.
uint64_t join_step_cost(uint64_t build_rows, uint64_t probe_rows, bool has_edge,
                        const CostModelConfig& cfg);

// Strictly left-deep order: cheapest first pair, then cheapest next table,
// accumulated tree kept on the build side.
JoinTree greedy_left_deep(const JoinGraph& g, const CostModelConfig& cfg);

// Exhaustive subset DP over all binary shapes, bushy included; 12 tables max.
// Ties break on the lexicographically smallest left-to-right leaf name list.
JoinTree dp_permutation(const JoinGraph& g, const CostModelConfig& cfg);

}  // namespace rawq::opt
