#include <doctest.h>

#include <random>
#include <vector>

#include "rawq/error.hpp"
#include "rawq/opt/cost_model.hpp"

using namespace rawq;
using namespace rawq::opt;

namespace {

sql::ExprPtr column(uint32_t ordinal) {
  sql::ColumnRef r;
  r.column = "c" + std::to_string(ordinal);
  r.resolved = true;
  r.table_idx = 0;
  r.ordinal = ordinal;
  r.type = ColumnType::Int32;
  return sql::make_expr(std::move(r));
}

sql::ExprPtr cmp(sql::CmpOp op, uint32_t ordinal, int64_t lit) {
  sql::Cmp c;
  c.op = op;
  c.lhs = column(ordinal);
  c.rhs = sql::make_expr(sql::IntLit{lit});
  return sql::make_expr(std::move(c));
}

TableStats stats_with(uint64_t rows, std::vector<uint64_t> distinct) {
  TableStats s;
  s.row_count = rows;
  s.distinct_counts = std::move(distinct);
  return s;
}

}  // namespace

TEST_SUITE_BEGIN("cost_model");

TEST_CASE("join row estimate picks the lower figure") {
  CHECK(estimate_join_rows(5000, 10000, 2500, 5000) == 10000);
  CHECK(estimate_join_rows(0, 10000, 1, 1) == 0);
  CHECK(estimate_join_rows(10000, 0, 1, 1) == 0);
  // Symmetric in (R, S).
  CHECK(estimate_join_rows(10000, 5000, 5000, 2500) == 10000);
  // Rounds up.
  CHECK(estimate_join_rows(3, 3, 2, 2) == 5);
  // Degenerate distinct counts clamp to 1.
  CHECK(estimate_join_rows(4, 5, 0, 0) == 20);
}

TEST_CASE("join row estimate symmetry property") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    uint64_t tr = rng() % 100000, ts = rng() % 100000;
    uint64_t vr = 1 + rng() % 1000, vs = 1 + rng() % 1000;
    CHECK(estimate_join_rows(tr, ts, vr, vs) ==
          estimate_join_rows(ts, tr, vs, vr));
  }
}

TEST_CASE("block nested loop cost") {
  // One-tuple buffer degenerates to tuple-at-a-time rescans.
  CHECK(cost_block_nested_loop(1000, 500, 1) == 501000);
  // Build side fits in memory.
  CHECK(cost_block_nested_loop(1000, 500, 2000) == 1500);
  CHECK(cost_block_nested_loop(0, 500, 1) == 500);
  CHECK(cost_block_nested_loop(0, 500, 2000) == 500);
  // General case: tR + tS * ceil(tR / (M - 2)).
  CHECK(cost_block_nested_loop(1000, 500, 102) == 1000 + 500 * 10);
  CHECK(cost_block_nested_loop(101, 7, 102) == 108);
}

TEST_CASE("sort merge cost") {
  CHECK(cost_sort_merge(8, 4, false) == 36);
  CHECK(cost_sort_merge(8, 4, true) == 12);
  CHECK(cost_sort_merge(1, 1, false) == 0);
  // Both log factors use the build side's cardinality.
  CHECK(cost_sort_merge(8, 1024, false) == 8 * 3 + 1024 * 3);
}

TEST_CASE("hash cost") {
  CHECK(cost_hash(100, 200, true) == 900);
  CHECK(cost_hash(100, 8, false) == 540);
  CHECK(cost_hash(0, 0, true) == 0);
  // The pass factor clamps at zero for tiny probe sides.
  CHECK(cost_hash(100, 2, false) == 102);
  CHECK(cost_hash(100, 1, false) == 101);
}

TEST_CASE("ceil_log2") {
  CHECK(ceil_log2(0) == 0);
  CHECK(ceil_log2(1) == 0);
  CHECK(ceil_log2(2) == 1);
  CHECK(ceil_log2(3) == 2);
  CHECK(ceil_log2(4) == 2);
  CHECK(ceil_log2(5) == 3);
  CHECK(ceil_log2(8) == 3);
  CHECK(ceil_log2(9) == 4);
  CHECK(ceil_log2(uint64_t{1} << 62) == 62);
  CHECK(ceil_log2((uint64_t{1} << 62) + 1) == 63);
}

TEST_CASE("costs are monotone in both inputs") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 300; ++i) {
    uint64_t tr = rng() % 10000, ts = rng() % 10000;
    uint64_t dr = rng() % 100, ds = rng() % 100;
    for (uint64_t m : {uint64_t{1}, uint64_t{3}, uint64_t{64}, uint64_t{100000}}) {
      CHECK(cost_block_nested_loop(tr + dr, ts, m) >=
            cost_block_nested_loop(tr, ts, m));
      CHECK(cost_block_nested_loop(tr, ts + ds, m) >=
            cost_block_nested_loop(tr, ts, m));
    }
    for (bool sorted : {false, true}) {
      CHECK(cost_sort_merge(tr + dr, ts, sorted) >= cost_sort_merge(tr, ts, sorted));
      CHECK(cost_sort_merge(tr, ts + ds, sorted) >= cost_sort_merge(tr, ts, sorted));
    }
    for (bool fits : {false, true}) {
      CHECK(cost_hash(tr + dr, ts, fits) >= cost_hash(tr, ts, fits));
      CHECK(cost_hash(tr, ts + ds, fits) >= cost_hash(tr, ts, fits));
    }
  }
}

TEST_CASE("costs saturate instead of overflowing") {
  const uint64_t huge = std::numeric_limits<uint64_t>::max() / 2;
  CHECK(cost_block_nested_loop(huge, huge, 1) ==
        std::numeric_limits<uint64_t>::max());
  CHECK(cost_hash(huge, huge, false) == std::numeric_limits<uint64_t>::max());
  CHECK(cost_sort_merge(huge, huge, false) ==
        std::numeric_limits<uint64_t>::max());
}

TEST_CASE("filter selectivity") {
  CostModelConfig cfg;
  TableStats stats = stats_with(10000, {2500, 10, 5});

  auto eq0 = cmp(sql::CmpOp::Eq, 0, 42);
  auto eq1 = cmp(sql::CmpOp::Eq, 1, 42);
  auto eq2 = cmp(sql::CmpOp::Eq, 2, 42);
  auto lt0 = cmp(sql::CmpOp::Lt, 0, 42);

  CHECK(predicate_selectivity(*eq0, stats, cfg) == 1.0 / 2500);
  CHECK(predicate_selectivity(*lt0, stats, cfg) == cfg.default_range_selectivity);

  std::vector<const sql::Expr*> none;
  CHECK(filter_selectivity(none, stats, cfg) == 1.0);

  std::vector<const sql::Expr*> two{eq1.get(), eq2.get()};
  CHECK(filter_selectivity(two, stats, cfg) == doctest::Approx(1.0 / 50));

  // Equality side order does not matter.
  sql::Cmp rev;
  rev.op = sql::CmpOp::Eq;
  rev.lhs = sql::make_expr(sql::IntLit{42});
  rev.rhs = column(0);
  auto reversed = sql::make_expr(std::move(rev));
  CHECK(predicate_selectivity(*reversed, stats, cfg) == 1.0 / 2500);

  // BETWEEN takes the configured range default.
  sql::Between bt;
  bt.expr = column(0);
  bt.lo = sql::make_expr(sql::IntLit{1});
  bt.hi = sql::make_expr(sql::IntLit{5});
  auto between = sql::make_expr(std::move(bt));
  CHECK(predicate_selectivity(*between, stats, cfg) ==
        cfg.default_range_selectivity);

  // Zero distinct count (unknown) behaves as one value.
  TableStats empty = stats_with(0, {0});
  CHECK(predicate_selectivity(*eq0, empty, cfg) == 1.0);

  // Product never reaches zero, so cardinalities stay positive.
  std::vector<sql::ExprPtr> own;
  std::vector<const sql::Expr*> many;
  for (int i = 0; i < 2000; ++i) {
    own.push_back(cmp(sql::CmpOp::Eq, 0, i));
    many.push_back(own.back().get());
  }
  CHECK(filter_selectivity(many, stats, cfg) > 0.0);
}

TEST_CASE("config validation") {
  CostModelConfig cfg;
  cfg.check();
  cfg.memory_capacity_tuples = 2;
  CHECK_THROWS_AS(cfg.check(), Error);
  cfg.memory_capacity_tuples = 3;
  cfg.default_range_selectivity = 0.0;
  CHECK_THROWS_AS(cfg.check(), Error);
  cfg.default_range_selectivity = 1.5;
  CHECK_THROWS_AS(cfg.check(), Error);
}

TEST_SUITE_END();
