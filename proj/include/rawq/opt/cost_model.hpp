#pragma once

#include <cstdint>
#include <span>

#include "rawq/catalog.hpp"
#include "rawq/sql/ast.hpp"

namespace rawq::opt {

enum class JoinAlgorithm { Hash, SortMerge, BlockNestedLoop };

struct CostModelConfig {
  // Buffer bound M used by case selection; the cost formulas themselves
  // accept any positive value, including the degenerate M=1.
  uint64_t memory_capacity_tuples = 1u << 20;
  JoinAlgorithm join_algorithm = JoinAlgorithm::Hash;
  double default_range_selectivity = 1.0 / 3.0;

  void check() const;  // memory_capacity_tuples >= 3
};

// ceil(log2 x), with x <= 1 mapping to 0.
uint32_t ceil_log2(uint64_t x);

// min(tR*tS/vR, tR*tS/vS) = tR*tS/max(vR,vS), rounded up; 0 on empty input.
uint64_t estimate_join_rows(uint64_t t_r, uint64_t t_s, uint64_t v_r, uint64_t v_s);

// R is the outer (build) side. Fits-in-memory case tR+tS; one-tuple buffer
// tR + tR*tS; otherwise tR + tS*ceil(tR/(M-2)).
uint64_t cost_block_nested_loop(uint64_t t_r, uint64_t t_s,
                                uint64_t memory_capacity_tuples);

// Unsorted inputs pay the sort passes; both log factors use tR.
uint64_t cost_sort_merge(uint64_t t_r, uint64_t t_s, bool inputs_sorted);

// In-memory 3(tR+tS); spilled 2(tR+tS)(ceil(log2 tS)-1) + tR + tS with the
// parenthesized factor clamped at zero.
uint64_t cost_hash(uint64_t t_r, uint64_t t_s, bool fits_memory);

// Selectivity of one single-table predicate: equality 1/max(1,V), ranges and
// BETWEEN take the configured default.
double predicate_selectivity(const sql::Expr& pred, const TableStats& stats,
                             const CostModelConfig& cfg);

// Product over a conjunction, clamped into (0, 1].
double filter_selectivity(std::span<const sql::Expr* const> preds,
                          const TableStats& stats, const CostModelConfig& cfg);

}  // namespace rawq::opt
