#include "rawq/opt/join_order.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "rawq/error.hpp"

namespace rawq::opt {
namespace {

constexpr uint64_t kRowCap = uint64_t{1} << 62;

uint64_t clamp_rows(long double v) {
  if (v <= 0) return 0;
  // Selectivities like 1/50 are inexact; snap to a neighboring integer so
  // the ceil does not inflate an exact quotient (100 * 1/50 must stay 2).
  long double nearest = std::nearbyint(v);
  if (nearest > 0 && std::fabs(v - nearest) <= v * 1e-9L) v = nearest;
  long double c = std::ceil(v);
  if (c >= static_cast<long double>(kRowCap)) return kRowCap;
  return static_cast<uint64_t>(c);
}

std::vector<int> edges_within(const JoinGraph& g, uint32_t mask) {
  std::vector<int> out;
  for (size_t i = 0; i < g.edges.size(); ++i) {
    uint32_t ab = (1u << g.edges[i].a) | (1u << g.edges[i].b);
    if ((mask & ab) == ab) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<int> edges_between(const JoinGraph& g, uint32_t lhs, uint32_t rhs) {
  std::vector<int> out;
  for (size_t i = 0; i < g.edges.size(); ++i) {
    uint32_t a = 1u << g.edges[i].a, b = 1u << g.edges[i].b;
    if (((a & lhs) && (b & rhs)) || ((a & rhs) && (b & lhs)))
      out.push_back(static_cast<int>(i));
  }
  return out;
}

std::unique_ptr<JoinTreeNode> make_leaf(const JoinGraph& g, int node_idx) {
  auto n = std::make_unique<JoinTreeNode>();
  n->leaf = node_idx;
  n->mask = 1u << node_idx;
  n->est_rows = g.nodes[node_idx].rows;
  return n;
}

std::unique_ptr<JoinTreeNode> make_join(const JoinGraph& g,
                                        std::unique_ptr<JoinTreeNode> build,
                                        std::unique_ptr<JoinTreeNode> probe,
                                        const CostModelConfig& cfg) {
  auto n = std::make_unique<JoinTreeNode>();
  n->mask = build->mask | probe->mask;
  n->edges = edges_between(g, build->mask, probe->mask);
  n->est_rows = subset_rows(g, n->mask);
  n->est_cost = join_step_cost(build->est_rows, probe->est_rows,
                               !n->edges.empty(), cfg);
  n->cumulative_cost =
      n->est_cost + build->cumulative_cost + probe->cumulative_cost;
  n->build = std::move(build);
  n->probe = std::move(probe);
  return n;
}

// Left-to-right leaf names; the deterministic tie-break key.
std::string leaf_names(const JoinGraph& g, const JoinTreeNode& n) {
  if (n.is_leaf()) return g.nodes[n.leaf].name;
  return leaf_names(g, *n.build) + "," + leaf_names(g, *n.probe);
}

}  // namespace

JoinGraph build_join_graph(const sql::ValidatedQuery& vq, const Catalog& catalog,
                           const CostModelConfig& cfg) {
  JoinGraph g;
  for (size_t t = 0; t < vq.tables.size(); ++t) {
    JoinGraph::Node n;
    n.name = vq.tables[t];
    n.table_idx = static_cast<int>(t);
    const TableStats& stats = catalog.stats(n.name);
    n.base_rows = stats.row_count;
    n.selectivity = filter_selectivity(vq.filters[t], stats, cfg);
    n.rows = clamp_rows(static_cast<long double>(n.base_rows) * n.selectivity);
    g.nodes.push_back(std::move(n));
  }
  for (size_t i = 0; i < vq.join_preds.size(); ++i) {
    const sql::JoinPred& jp = vq.join_preds[i];
    JoinGraph::Edge e;
    e.a = jp.left_table;
    e.b = jp.right_table;
    e.a_ord = jp.left_ord;
    e.b_ord = jp.right_ord;
    e.pred_idx = static_cast<int>(i);
    auto distinct = [&](int table, uint32_t ord) -> uint64_t {
      const TableStats& s = catalog.stats(vq.tables[table]);
      if (ord < s.distinct_counts.size())
        return std::max<uint64_t>(1, s.distinct_counts[ord]);
      return 1;
    };
    e.v_a = distinct(e.a, e.a_ord);
    e.v_b = distinct(e.b, e.b_ord);
    g.edges.push_back(e);
  }
  return g;
}

uint64_t subset_rows(const JoinGraph& g, uint32_t mask) {
  long double prod = 1.0L;
  for (size_t i = 0; i < g.nodes.size(); ++i) {
    if (!(mask & (1u << i))) continue;
    if (g.nodes[i].rows == 0) return 0;
    prod *= static_cast<long double>(g.nodes[i].rows);
  }
  for (int ei : edges_within(g, mask)) {
    const auto& e = g.edges[ei];
    prod /= static_cast<long double>(std::max(e.v_a, e.v_b));
  }
  return clamp_rows(prod);
}

uint64_t join_step_cost(uint64_t build_rows, uint64_t probe_rows, bool has_edge,
                        const CostModelConfig& cfg) {
  if (!has_edge)
    return cost_block_nested_loop(build_rows, probe_rows,
                                  cfg.memory_capacity_tuples);
  switch (cfg.join_algorithm) {
    case JoinAlgorithm::Hash:
      return cost_hash(build_rows, probe_rows,
                       build_rows <= cfg.memory_capacity_tuples);
    case JoinAlgorithm::SortMerge:
      return cost_sort_merge(build_rows, probe_rows, false);
    case JoinAlgorithm::BlockNestedLoop:
      return cost_block_nested_loop(build_rows, probe_rows,
                                    cfg.memory_capacity_tuples);
  }
  throw_internal("bad JoinAlgorithm");
}

JoinTree greedy_left_deep(const JoinGraph& g, const CostModelConfig& cfg) {
  if (g.nodes.empty()) throw_user("join graph has no tables");
  if (g.nodes.size() > 31) throw_user("too many tables in FROM");
  cfg.check();
  const int n = static_cast<int>(g.nodes.size());
  if (n == 1) return JoinTree{make_leaf(g, 0)};

  // Cheapest ordered first pair.
  int best_i = -1, best_j = -1;
  uint64_t best_cost = 0;
  std::string best_key;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      bool edge = !edges_between(g, 1u << i, 1u << j).empty();
      uint64_t c = join_step_cost(g.nodes[i].rows, g.nodes[j].rows, edge, cfg);
      std::string key = g.nodes[i].name + "," + g.nodes[j].name;
      if (best_i < 0 || c < best_cost || (c == best_cost && key < best_key)) {
        best_i = i;
        best_j = j;
        best_cost = c;
        best_key = std::move(key);
      }
    }
  }
  auto tree = make_join(g, make_leaf(g, best_i), make_leaf(g, best_j), cfg);

  uint32_t remaining = ((1u << n) - 1) & ~tree->mask;
  while (remaining) {
    int best_k = -1;
    uint64_t best_step = 0;
    for (int k = 0; k < n; ++k) {
      if (!(remaining & (1u << k))) continue;
      bool edge = !edges_between(g, tree->mask, 1u << k).empty();
      uint64_t c = join_step_cost(tree->est_rows, g.nodes[k].rows, edge, cfg);
      if (best_k < 0 || c < best_step ||
          (c == best_step && g.nodes[k].name < g.nodes[best_k].name)) {
        best_k = k;
        best_step = c;
      }
    }
    tree = make_join(g, std::move(tree), make_leaf(g, best_k), cfg);
    remaining &= ~(1u << best_k);
  }
  return JoinTree{std::move(tree)};
}

JoinTree dp_permutation(const JoinGraph& g, const CostModelConfig& cfg) {
  if (g.nodes.empty()) throw_user("join graph has no tables");
  cfg.check();
  const int n = static_cast<int>(g.nodes.size());
  if (n > 12)
    throw_user("exhaustive join ordering supports at most 12 tables, got " +
               std::to_string(n));
  if (n == 1) return JoinTree{make_leaf(g, 0)};

  const uint32_t full = (1u << n) - 1;
  struct Entry {
    uint64_t cost = 0;
    uint64_t rows = 0;
    uint32_t build = 0, probe = 0;  // chosen split; 0 for leaves
    std::string names;
    bool set = false;
  };
  std::vector<Entry> dp(full + 1);
  for (int i = 0; i < n; ++i) {
    Entry& e = dp[1u << i];
    e.rows = g.nodes[i].rows;
    e.names = g.nodes[i].name;
    e.set = true;
  }
  for (uint32_t mask = 1; mask <= full; ++mask) {
    if (std::popcount(mask) < 2) continue;
    Entry& cur = dp[mask];
    cur.rows = subset_rows(g, mask);
    for (uint32_t build = (mask - 1) & mask; build; build = (build - 1) & mask) {
      uint32_t probe = mask & ~build;
      const Entry& l = dp[build];
      const Entry& r = dp[probe];
      bool edge = !edges_between(g, build, probe).empty();
      uint64_t step = join_step_cost(l.rows, r.rows, edge, cfg);
      uint64_t total = step + l.cost + r.cost;
      std::string names = l.names + "," + r.names;
      if (!cur.set || total < cur.cost ||
          (total == cur.cost && names < cur.names)) {
        cur.set = true;
        cur.cost = total;
        cur.build = build;
        cur.probe = probe;
        cur.names = std::move(names);
      }
    }
  }

  // Rebuild the chosen tree from the split table.
  auto rebuild = [&](auto&& self, uint32_t mask) -> std::unique_ptr<JoinTreeNode> {
    if (std::popcount(mask) == 1)
      return make_leaf(g, std::countr_zero(mask));
    const Entry& e = dp[mask];
    return make_join(g, self(self, e.build), self(self, e.probe), cfg);
  };
  JoinTree tree{rebuild(rebuild, full)};
  if (tree.root->cumulative_cost != dp[full].cost)
    throw_internal("join DP reconstruction cost mismatch");
  return tree;
}

}  // namespace rawq::opt
