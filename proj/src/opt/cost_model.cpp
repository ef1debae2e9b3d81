#include "rawq/opt/cost_model.hpp"

#include <algorithm>
#include <bit>
#include <limits>

#include "rawq/error.hpp"

namespace rawq::opt {
namespace {

constexpr uint64_t kCostCap = std::numeric_limits<uint64_t>::max();

uint64_t saturate(unsigned __int128 v) {
  return v > kCostCap ? kCostCap : static_cast<uint64_t>(v);
}

uint64_t mul_sat(uint64_t a, uint64_t b) {
  return saturate(static_cast<unsigned __int128>(a) * b);
}

uint64_t add_sat(uint64_t a, uint64_t b) {
  uint64_t r = a + b;
  return r < a ? kCostCap : r;
}

uint64_t ceil_div(uint64_t a, uint64_t b) { return b == 0 ? 0 : (a + b - 1) / b; }

}  // namespace

void CostModelConfig::check() const {
  if (memory_capacity_tuples < 3)
    throw_user("memory_capacity_tuples must be at least 3");
  if (!(default_range_selectivity > 0.0) || default_range_selectivity > 1.0)
    throw_user("default_range_selectivity must be in (0, 1]");
}

uint32_t ceil_log2(uint64_t x) {
  if (x <= 1) return 0;
  return static_cast<uint32_t>(64 - std::countl_zero(x - 1));
}

uint64_t estimate_join_rows(uint64_t t_r, uint64_t t_s, uint64_t v_r, uint64_t v_s) {
  if (t_r == 0 || t_s == 0) return 0;
  uint64_t v = std::max<uint64_t>(1, std::max(v_r, v_s));
  unsigned __int128 prod = static_cast<unsigned __int128>(t_r) * t_s;
  return saturate((prod + v - 1) / v);
}

uint64_t cost_block_nested_loop(uint64_t t_r, uint64_t t_s,
                                uint64_t memory_capacity_tuples) {
  if (t_r <= memory_capacity_tuples) return add_sat(t_r, t_s);
  // M=2 would divide by zero below; it gets the one-tuple treatment.
  if (memory_capacity_tuples <= 2) return add_sat(t_r, mul_sat(t_r, t_s));
  return add_sat(t_r, mul_sat(t_s, ceil_div(t_r, memory_capacity_tuples - 2)));
}

uint64_t cost_sort_merge(uint64_t t_r, uint64_t t_s, bool inputs_sorted) {
  if (inputs_sorted) return add_sat(t_r, t_s);
  uint64_t log_r = ceil_log2(t_r);
  return add_sat(mul_sat(t_r, log_r), mul_sat(t_s, log_r));
}

uint64_t cost_hash(uint64_t t_r, uint64_t t_s, bool fits_memory) {
  uint64_t total = add_sat(t_r, t_s);
  if (fits_memory) return mul_sat(3, total);
  uint32_t log_s = ceil_log2(t_s);
  uint64_t passes = log_s > 0 ? log_s - 1 : 0;
  return add_sat(mul_sat(mul_sat(2, total), passes), total);
}

double predicate_selectivity(const sql::Expr& pred, const TableStats& stats,
                             const CostModelConfig& cfg) {
  auto column_distinct = [&](const sql::Expr& e) -> uint64_t {
    if (const auto* ref = e.get_if<sql::ColumnRef>())
      if (ref->resolved && ref->ordinal < stats.distinct_counts.size())
        return std::max<uint64_t>(1, stats.distinct_counts[ref->ordinal]);
    return 1;
  };
  if (const auto* c = pred.get_if<sql::Cmp>()) {
    if (c->op == sql::CmpOp::Eq) {
      uint64_t v = 1;
      if (c->lhs->is<sql::ColumnRef>())
        v = column_distinct(*c->lhs);
      else if (c->rhs->is<sql::ColumnRef>())
        v = column_distinct(*c->rhs);
      return 1.0 / static_cast<double>(v);
    }
    return cfg.default_range_selectivity;
  }
  if (pred.is<sql::Between>()) return cfg.default_range_selectivity;
  return 1.0;
}

double filter_selectivity(std::span<const sql::Expr* const> preds,
                          const TableStats& stats, const CostModelConfig& cfg) {
  double s = 1.0;
  for (const sql::Expr* p : preds) s *= predicate_selectivity(*p, stats, cfg);
  s = std::min(s, 1.0);
  return s > 0.0 ? s : std::numeric_limits<double>::min();
}

}  // namespace rawq::opt
