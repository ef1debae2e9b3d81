#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "rawq/catalog.hpp"
#include "rawq/codegen/codegen.hpp"
#include "rawq/codegen/pipeline.hpp"
#include "rawq/codegen/template_engine.hpp"
#include "rawq/dates.hpp"
#include "rawq/error.hpp"
#include "rawq/opt/plan.hpp"
#include "rawq/sql/parser.hpp"
#include "rawq/sql/validator.hpp"
#include "test_util.hpp"

using namespace rawq;
using codegen::Bindings;
using codegen::SpecializationFlags;

namespace {

opt::PhysicalPlan plan_query(const std::string& text, const Catalog& cat) {
  opt::CostModelConfig cfg;
  sql::ValidatedQuery vq = sql::validate(sql::parse(text), cat);
  opt::JoinGraph graph = opt::build_join_graph(vq, cat, cfg);
  opt::JoinTree tree = opt::dp_permutation(graph, cfg);
  return opt::build_plan(std::move(vq), std::move(tree));
}

size_t count(const std::string& hay, const std::string& needle) {
  size_t n = 0;
  for (size_t p = hay.find(needle); p != std::string::npos;
       p = hay.find(needle, p + needle.size()))
    ++n;
  return n;
}

std::vector<std::string> col_markers(const std::string& src) {
  std::vector<std::string> out;
  for (size_t p = src.find("/*COL:"); p != std::string::npos;
       p = src.find("/*COL:", p + 1)) {
    const size_t e = src.find("*/", p);
    REQUIRE(e != std::string::npos);
    out.push_back(src.substr(p + 6, e - (p + 6)));
  }
  return out;
}

template <typename Fn>
void expect_error(ErrorKind kind, Fn&& fn) {
  try {
    fn();
    FAIL_CHECK("expected an Error");
  } catch (const Error& e) {
    CHECK(e.kind() == kind);
  }
}

Catalog lineitem_catalog() {
  Catalog cat;
  cat.register_table(test::lineitem_def("lineitem.tbl"));
  return cat;
}

Catalog r1r2_catalog() {
  Catalog cat;
  cat.register_table(test::r1_def("r1.tbl"));
  cat.register_table(test::r2_def("r2.tbl"));
  return cat;
}

TableDef small_def(const char* name,
                   std::vector<std::tuple<const char*, ColumnType, bool>> cols) {
  TableDef def;
  def.name = name;
  def.raw_path = std::string(name) + ".tbl";
  def.delimiter = '|';
  for (auto& [cname, type, nullable] : cols) {
    ColumnDef c;
    c.name = cname;
    c.ordinal = static_cast<uint32_t>(def.columns.size());
    c.type = type;
    c.nullable = nullable;
    def.columns.push_back(std::move(c));
  }
  return def;
}

const std::string kQ6 =
    "SELECT SUM(l_extendedprice * l_discount) AS revenue FROM lineitem "
    "WHERE l_shipdate >= DATE '1994-01-01' AND l_shipdate < DATE '1995-01-01' "
    "AND l_discount BETWEEN 0.06 - 0.01 AND 0.06 + 0.01 AND l_quantity < 24";

}  // namespace

TEST_SUITE("codegen") {

TEST_CASE("template: foreach unrolls per column, in order") {
  const std::string tmpl =
      "@foreach(c in COLS)print(@{c.name} + \" type: @{c.type}\");\n@end";
  auto col = [](const char* n, const char* t) {
    Bindings e;
    e.vars["name"] = n;
    e.vars["type"] = t;
    return e;
  };
  Bindings b;
  b.lists["COLS"] = {col("name", "String"), col("age", "Integer"),
                     col("height", "Double")};
  CHECK(codegen::render(tmpl, b) ==
        "print(name + \" type: String\");\n"
        "print(age + \" type: Integer\");\n"
        "print(height + \" type: Double\");\n");
}

TEST_CASE("template: text without constructs renders as identity") {
  const std::string text = "no placeholders here\n  for (x) { }\n";
  CHECK(codegen::render(text, Bindings{}) == text);
}

TEST_CASE("template: unbound placeholder error names the placeholder") {
  try {
    codegen::render("a @{missing_thing} b", Bindings{});
    FAIL_CHECK("expected an Error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Internal);
    CHECK(std::string(e.what()).find("missing_thing") != std::string::npos);
  }
}

TEST_CASE("template: conditionals, negation, and the escape") {
  Bindings b;
  b.flags["on"] = true;
  b.flags["off"] = false;
  CHECK(codegen::render("@if(on)yes@end@if(off)no@end@if(!off)neg@end@@x", b) ==
        "yesneg@x");
}

TEST_CASE("split_pipelines: scan-only query is one final pipeline") {
  Catalog cat = lineitem_catalog();
  opt::PhysicalPlan plan = plan_query(kQ6, cat);
  auto pipes = codegen::split_pipelines(plan);
  REQUIRE(pipes.size() == 1);
  CHECK(pipes[0].is_final);
  CHECK(pipes[0].table_idx == 0);
  CHECK(pipes[0].probes.empty());
  CHECK(pipes[0].sink_join == nullptr);
}

TEST_CASE("split_pipelines: one join is build then probe") {
  Catalog cat = r1r2_catalog();
  opt::PhysicalPlan plan =
      plan_query("SELECT x, y FROM R1, R2 WHERE a = b", cat);
  auto pipes = codegen::split_pipelines(plan);
  REQUIRE(pipes.size() == 2);
  CHECK_FALSE(pipes[0].is_final);
  REQUIRE(pipes[0].sink_join != nullptr);
  CHECK(pipes[0].probes.empty());
  CHECK(pipes[1].is_final);
  REQUIRE(pipes[1].probes.size() == 1);
  CHECK(pipes[1].probes[0] == pipes[0].sink_join);
  CHECK(pipes[0].table_idx != pipes[1].table_idx);
}

TEST_CASE("split_pipelines: every build precedes the pipeline probing it") {
  Catalog cat;
  cat.register_table(small_def("A", {{"id", ColumnType::Int32, false},
                                     {"k", ColumnType::Int32, false}}));
  cat.register_table(small_def("B", {{"k", ColumnType::Int32, false},
                                     {"j", ColumnType::Int32, false}}));
  cat.register_table(small_def("C", {{"j", ColumnType::Int32, false},
                                     {"v", ColumnType::Int32, false}}));
  opt::PhysicalPlan plan = plan_query(
      "SELECT A.id, C.v FROM A, B, C WHERE A.k = B.k AND B.j = C.j", cat);
  auto pipes = codegen::split_pipelines(plan);
  REQUIRE(pipes.size() == 3);
  CHECK(pipes[2].is_final);
  for (size_t i = 0; i + 1 < pipes.size(); ++i) {
    CHECK_FALSE(pipes[i].is_final);
    REQUIRE(pipes[i].sink_join != nullptr);
    bool probed_later = false;
    for (size_t l = i + 1; l < pipes.size(); ++l)
      for (const auto* jn : pipes[l].probes)
        probed_later |= jn == pipes[i].sink_join;
    CHECK(probed_later);
  }
  // Distinct scan tables across pipelines.
  std::vector<int> tables = {pipes[0].table_idx, pipes[1].table_idx,
                             pipes[2].table_idx};
  std::sort(tables.begin(), tables.end());
  CHECK(tables == std::vector<int>{0, 1, 2});
}

TEST_CASE("fused Q6 kernel: one row loop, markers for ordinals 0-10 only") {
  Catalog cat = lineitem_catalog();
  opt::PhysicalPlan plan = plan_query(kQ6, cat);
  SpecializationFlags flags;
  codegen::GeneratedSource g = codegen::gen_fused(plan, cat, flags);

  CHECK(count(g.source, "/*ROWLOOP*/") == 1);
  CHECK(count(g.source, "/*TYCHK*/") == 0);
  CHECK(count(g.source, "/*NULLCHK*/") == 0);

  // Tokenization passes through every field up to the last needed ordinal.
  const std::vector<std::string> expected = {
      "l_orderkey",   "l_partkey",       "l_suppkey",  "l_linenumber",
      "l_quantity",   "l_extendedprice", "l_discount", "l_tax",
      "l_returnflag", "l_linestatus",    "l_shipdate"};
  CHECK(col_markers(g.source) == expected);

  // Typed parse blocks exist only for the four needed columns.
  CHECK(count(g.source, "rq_parse_f64(") - 1 == 3);  // one is the helper def
  CHECK(count(g.source, "rq_parse_date(") - 1 == 1);
  CHECK(count(g.source, "rq_parse_i32(") - 1 == 0);

  // Straight-line unrolled code: no loop keyword between column markers.
  const size_t first = g.source.find("/*COL:");
  const size_t last = g.source.rfind("/*COL:");
  const std::string span = g.source.substr(first, last - first);
  CHECK(span.find("for (") == std::string::npos);
  CHECK(span.find("while (") == std::string::npos);

  CHECK(g.entry_symbol.size() == 9 + 16);
  CHECK(g.source.find(g.entry_symbol) != std::string::npos);
  CHECK(g.params.ints.empty());
  CHECK(g.params.floats.empty());
}

TEST_CASE("non-fused Q6 kernel: two row loops through a positional map") {
  Catalog cat = lineitem_catalog();
  opt::PhysicalPlan plan = plan_query(kQ6, cat);
  SpecializationFlags flags;
  flags.fusion = false;
  codegen::GeneratedSource g = codegen::gen_nonfused(plan, cat, flags);

  CHECK(count(g.source, "/*ROWLOOP*/") == 2);
  CHECK(g.source.find("posmap0") != std::string::npos);
  CHECK(count(g.source, "/*TYCHK*/") == 0);

  // Markers belong to the tokenize pass; the parse pass has none.
  CHECK(col_markers(g.source).size() == 11);
  const size_t pass2 = g.source.find("Pass 2");
  REQUIRE(pass2 != std::string::npos);
  CHECK(g.source.find("/*COL:", pass2) == std::string::npos);
  CHECK(count(g.source, "rq_parse_f64(") - 1 == 3);
  CHECK(count(g.source, "rq_parse_date(") - 1 == 1);
}

TEST_CASE("unroll off: a type dispatch replaces per-column blocks") {
  Catalog cat = lineitem_catalog();
  opt::PhysicalPlan plan = plan_query(kQ6, cat);
  SpecializationFlags flags;
  flags.unroll_columns = false;
  codegen::GeneratedSource g = codegen::generate(plan, cat, flags);
  CHECK(count(g.source, "/*COL:") == 0);
  CHECK(count(g.source, "/*TYCHK*/") == 1);
  CHECK(count(g.source, "/*ROWLOOP*/") == 1);
  CHECK(g.source.find("RqSlice rq_sl[11]") != std::string::npos);
}

TEST_CASE("elide off: null checks appear on non-null columns") {
  Catalog cat = lineitem_catalog();
  opt::PhysicalPlan plan = plan_query(kQ6, cat);
  SpecializationFlags flags;
  flags.elide_null_checks = false;
  codegen::GeneratedSource g = codegen::generate(plan, cat, flags);
  // One empty-field check per needed column; all four are non-null.
  CHECK(count(g.source, "/*NULLCHK*/") == 4);
}

TEST_CASE("nullable column keeps its checks even with elision on") {
  Catalog cat;
  cat.register_table(small_def("N", {{"a", ColumnType::Int32, true},
                                     {"b", ColumnType::Int32, false}}));
  opt::PhysicalPlan plan =
      plan_query("SELECT SUM(b) FROM N WHERE a > 5", cat);
  SpecializationFlags flags;
  codegen::GeneratedSource g = codegen::generate(plan, cat, flags);
  // One parse-time branch plus one evaluation-time guard.
  CHECK(count(g.source, "/*NULLCHK*/") == 2);
}

TEST_CASE("single INT32 projection: one parse block, no type branches") {
  Catalog cat;
  cat.register_table(small_def("S", {{"v", ColumnType::Int32, false},
                                     {"w", ColumnType::Int32, false}}));
  opt::PhysicalPlan plan = plan_query("SELECT v FROM S", cat);
  SpecializationFlags flags;
  codegen::GeneratedSource g = codegen::generate(plan, cat, flags);
  CHECK(count(g.source, "rq_parse_i32(") - 1 == 1);
  CHECK(count(g.source, "/*TYCHK*/") == 0);
  CHECK(count(g.source, "/*COL:") == 1);
}

TEST_CASE("join kernel: hash build in one pipeline, probe in the other") {
  Catalog cat = r1r2_catalog();
  opt::PhysicalPlan plan =
      plan_query("SELECT x, y FROM R1, R2 WHERE a = b", cat);
  SpecializationFlags flags;
  codegen::GeneratedSource g = codegen::gen_fused(plan, cat, flags);
  CHECK(count(g.source, "/*ROWLOOP*/") == 2);
  CHECK(g.source.find("ht0") != std::string::npos);
  CHECK(count(g.source, ".emplace(") == 1);
  CHECK(count(g.source, ".equal_range(") == 1);
  CHECK(g.source.find("struct Tup0") != std::string::npos);
}

TEST_CASE("signature: stable, flag-sensitive, conjunct-order-insensitive") {
  Catalog cat = lineitem_catalog();
  SpecializationFlags flags;

  opt::PhysicalPlan p1 = plan_query(
      "SELECT SUM(l_quantity) FROM lineitem "
      "WHERE l_quantity < 24 AND l_discount < 0.05", cat);
  opt::PhysicalPlan p2 = plan_query(
      "SELECT SUM(l_quantity) FROM lineitem "
      "WHERE l_discount < 0.05 AND l_quantity < 24", cat);
  CHECK(codegen::signature(p1, cat, flags) ==
        codegen::signature(p2, cat, flags));
  CHECK(codegen::generate(p1, cat, flags).source ==
        codegen::generate(p2, cat, flags).source);

  CHECK(codegen::signature(p1, cat, flags) ==
        codegen::signature(p1, cat, flags));

  const uint64_t base = codegen::signature(p1, cat, flags);
  SpecializationFlags v;
  v.fusion = false;
  CHECK(codegen::signature(p1, cat, v) != base);
  v = flags;
  v.elide_null_checks = false;
  CHECK(codegen::signature(p1, cat, v) != base);
  v = flags;
  v.inline_constants = false;
  CHECK(codegen::signature(p1, cat, v) != base);
  v = flags;
  v.unroll_columns = false;
  CHECK(codegen::signature(p1, cat, v) != base);
  v = flags;
  v.batch_rows = 8;
  CHECK(codegen::signature(p1, cat, v) != base);

  opt::PhysicalPlan p3 = plan_query(
      "SELECT SUM(l_quantity) FROM lineitem "
      "WHERE l_quantity < 25 AND l_discount < 0.05", cat);
  CHECK(codegen::signature(p3, cat, flags) != base);
}

TEST_CASE("generation is deterministic") {
  Catalog cat = lineitem_catalog();
  opt::PhysicalPlan plan = plan_query(kQ6, cat);
  SpecializationFlags flags;
  codegen::GeneratedSource a = codegen::generate(plan, cat, flags);
  codegen::GeneratedSource b = codegen::generate(plan, cat, flags);
  CHECK(a.source == b.source);
  CHECK(a.signature == b.signature);
  CHECK(a.entry_symbol == b.entry_symbol);
}

TEST_CASE("batch staging: gather/apply split inside the fused loop") {
  Catalog cat = lineitem_catalog();
  opt::PhysicalPlan plan = plan_query(kQ6, cat);
  SpecializationFlags flags;
  flags.batch_rows = 8;
  codegen::GeneratedSource g = codegen::generate(plan, cat, flags);
  CHECK(count(g.source, "/*ROWLOOP*/") == 1);
  CHECK(g.source.find("rq_cnt < 8u") != std::string::npos);
  CHECK(g.source.find("rq_b < rq_cnt") != std::string::npos);
  CHECK(col_markers(g.source).size() == 11);
}

TEST_CASE("batch limits and mode mismatches are rejected") {
  Catalog cat = lineitem_catalog();
  opt::PhysicalPlan plan = plan_query(kQ6, cat);
  SpecializationFlags flags;

  flags.batch_rows = 0;
  expect_error(ErrorKind::User, [&] { codegen::generate(plan, cat, flags); });
  flags.batch_rows = 65537;
  expect_error(ErrorKind::User, [&] { codegen::generate(plan, cat, flags); });
  flags.batch_rows = 8;
  flags.fusion = false;
  expect_error(ErrorKind::User, [&] { codegen::generate(plan, cat, flags); });

  SpecializationFlags f;
  f.fusion = false;
  expect_error(ErrorKind::Internal,
               [&] { codegen::gen_fused(plan, cat, f); });
  f.fusion = true;
  expect_error(ErrorKind::Internal,
               [&] { codegen::gen_nonfused(plan, cat, f); });
}

TEST_CASE("inline constants off: literals travel as parameters") {
  Catalog cat = lineitem_catalog();
  opt::PhysicalPlan plan = plan_query(kQ6, cat);
  SpecializationFlags flags;
  flags.inline_constants = false;
  codegen::GeneratedSource g = codegen::generate(plan, cat, flags);

  // Normalized filter order: quantity (ord 4), discount BETWEEN (ord 6),
  // shipdate < (ord 10), shipdate >= (ord 10).
  REQUIRE(g.params.ints.size() == 3);
  CHECK(g.params.ints[0] == 24);
  CHECK(g.params.ints[1] == days_from_civil(1995, 1, 1));
  CHECK(g.params.ints[2] == days_from_civil(1994, 1, 1));
  REQUIRE(g.params.floats.size() == 2);
  // The parser folds the literal arithmetic, so the bounds carry the folded
  // binary values, not the decimals they print as.
  CHECK(g.params.floats[0] == 0.06 - 0.01);
  CHECK(g.params.floats[1] == 0.06 + 0.01);
  CHECK(g.params.texts.empty());

  CHECK(g.source.find("call->int_params[2]") != std::string::npos);
  CHECK(g.source.find("call->float_params[1]") != std::string::npos);
  CHECK(g.source.find("s.p_i0") != std::string::npos);
  CHECK(g.source.find("s.p_f0") != std::string::npos);

  // With inlining back on there are no parameter slots at all.
  SpecializationFlags inl;
  codegen::GeneratedSource h = codegen::generate(plan, cat, inl);
  CHECK(h.source.find("p_i0") == std::string::npos);
  CHECK(h.source.find("int_params[") == std::string::npos);
  CHECK(h.params.ints.empty());
}

}  // TEST_SUITE
