#include <doctest.h>

#include <algorithm>
#include <array>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "rawq/catalog.hpp"
#include "rawq/dates.hpp"
#include "rawq/error.hpp"
#include "rawq/exec/interpreter.hpp"
#include "rawq/opt/plan.hpp"
#include "rawq/sql/parser.hpp"
#include "rawq/sql/validator.hpp"
#include "rawq/storage/chunk.hpp"
#include "rawq/storage/stored_table.hpp"
#include "rawq/storage/tokenize.hpp"
#include "test_util.hpp"

using namespace rawq;

namespace {

opt::PhysicalPlan plan_query(const std::string& text, const Catalog& cat) {
  opt::CostModelConfig cfg;
  sql::ValidatedQuery vq = sql::validate(sql::parse(text), cat);
  opt::JoinGraph graph = opt::build_join_graph(vq, cat, cfg);
  opt::JoinTree tree = opt::dp_permutation(graph, cfg);
  return opt::build_plan(std::move(vq), std::move(tree));
}

exec::ResultSet run(const std::string& text, const Catalog& cat,
                    const exec::ExecOptions& opts = {}) {
  return exec::run_generic(plan_query(text, cat), cat, opts);
}

// Order-insensitive row comparison: serialize and sort.
std::vector<std::string> sorted_rows(const exec::ResultSet& rs) {
  std::vector<std::string> out;
  for (const auto& row : rs.rows) {
    std::string s;
    for (const Value& v : row) {
      s += v.is_null() ? "<null>" : v.to_string();
      s += '|';
    }
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string li_row(const std::string& qty, const std::string& price,
                   const std::string& disc, const std::string& ship) {
  return "1|155190|7706|1|" + qty + "|" + price + "|" + disc + "|0.02|N|O|" +
         ship + "|1996-02-12|1996-03-22|DELIVER IN PERSON|TRUCK|waters|";
}

const std::string kQ6 =
    "SELECT SUM(l_extendedprice * l_discount) AS revenue FROM lineitem "
    "WHERE l_shipdate >= DATE '1994-01-01' AND l_shipdate < DATE '1995-01-01' "
    "AND l_discount BETWEEN 0.06 - 0.01 AND 0.06 + 0.01 AND l_quantity < 24";

// Six rows, exactly two of which satisfy all four Q6 conjuncts.
std::string q6_fixture() {
  return li_row("17", "1000.00", "0.06", "1994-03-13") + "\n" +  // qualifies
         li_row("23", "2000.00", "0.05", "1994-12-31") + "\n" +  // qualifies
         li_row("5", "9999.00", "0.06", "1995-01-01") + "\n" +   // date too late
         li_row("5", "9999.00", "0.06", "1993-12-31") + "\n" +   // date too early
         li_row("5", "9999.00", "0.04", "1994-06-01") + "\n" +   // discount low
         li_row("24", "9999.00", "0.06", "1994-06-01") + "\n";   // quantity high
}

Catalog lineitem_catalog(const test::TempDir& dir, const std::string& content) {
  test::write_file(dir.file("lineitem.tbl"), content);
  Catalog cat;
  cat.register_table(test::lineitem_def(dir.file("lineitem.tbl")));
  return cat;
}

Catalog r1r2_catalog(const test::TempDir& dir, const std::string& r1,
                     const std::string& r2) {
  test::write_file(dir.file("r1.tbl"), r1);
  test::write_file(dir.file("r2.tbl"), r2);
  Catalog cat;
  cat.register_table(test::r1_def(dir.file("r1.tbl")));
  cat.register_table(test::r2_def(dir.file("r2.tbl")));
  return cat;
}

// Parses full raw rows into one binary chunk, all columns.
storage::BinaryChunk chunk_from_rows(const TableDef& def,
                                     const std::vector<std::string>& rows) {
  std::vector<storage::ChunkBuilder::ColumnSpec> specs;
  for (const ColumnDef& c : def.columns) specs.push_back({c.type, c.nullable});
  storage::ChunkBuilder b(specs);
  std::vector<uint32_t> all(def.columns.size());
  std::iota(all.begin(), all.end(), 0);
  std::vector<storage::FieldSlice> slices(all.size());
  for (const std::string& row : rows) {
    REQUIRE(storage::tokenize_row(row, def.delimiter, def.trailing_delimiter,
                                  all, slices) == storage::TokenizeStatus::Ok);
    for (size_t i = 0; i < all.size(); ++i) {
      std::string_view field(row.data() + slices[i].start, slices[i].len);
      auto v = parse_field(field, def.columns[i].type, def.columns[i].nullable);
      REQUIRE(v);
      b.append_value(i, *v);
    }
    b.next_row();
  }
  return b.finish();
}

}  // namespace

TEST_SUITE_BEGIN("interpreter");

TEST_CASE("aggregate query over a raw file") {
  test::TempDir dir;
  Catalog cat = lineitem_catalog(dir, q6_fixture());

  exec::ResultSet rs = run(kQ6, cat);
  REQUIRE(rs.names == std::vector<std::string>{"revenue"});
  REQUIRE(rs.types == std::vector<ColumnType>{ColumnType::Float64});
  REQUIRE(rs.rows.size() == 1);
  REQUIRE(rs.rows[0].size() == 1);
  // Same IEEE expression the engine evaluates, in the same order.
  CHECK(rs.rows[0][0] == Value::f64(1000.0 * 0.06 + 2000.0 * 0.05));
}

TEST_CASE("filter keeps file order and boundary semantics") {
  test::TempDir dir;
  Catalog cat = lineitem_catalog(dir, q6_fixture());

  exec::ResultSet rs = run(
      "SELECT l_quantity, l_shipdate FROM lineitem WHERE l_quantity < 24", cat);
  REQUIRE(rs.rows.size() == 5);
  CHECK(rs.rows[0][0] == Value::f64(17.0));
  CHECK(rs.rows[1][0] == Value::f64(23.0));
  CHECK(rs.rows[0][1] == Value::date(days_from_civil(1994, 3, 13)));
  CHECK(rs.types[1] == ColumnType::Date);
}

TEST_CASE("hash join with a build-side filter") {
  test::TempDir dir;
  Catalog cat = r1r2_catalog(dir, "7|1\n3|1\n", "1|9\n");

  exec::ResultSet rs =
      run("SELECT * FROM R1, R2 WHERE R1.x = 7 AND R1.a = R2.b", cat);
  CHECK(rs.names == std::vector<std::string>{"x", "a", "b", "y"});
  REQUIRE(rs.rows.size() == 1);
  CHECK(rs.rows[0] == exec::Tuple{Value::i32(7), Value::i32(1), Value::i32(1),
                                  Value::i32(9)});

  // Without the filter both R1 rows match the single R2 key.
  exec::ResultSet all = run("SELECT * FROM R1, R2 WHERE R1.a = R2.b", cat);
  CHECK(all.rows.size() == 2);
}

TEST_CASE("cross join when no predicate connects the tables") {
  test::TempDir dir;
  Catalog cat = r1r2_catalog(dir, "7|1\n3|1\n", "1|9\n");

  exec::ResultSet rs = run("SELECT R1.x, R2.y FROM R1, R2", cat);
  CHECK(sorted_rows(rs) == std::vector<std::string>{"3|9|", "7|9|"});
}

TEST_CASE("empty input conventions") {
  test::TempDir dir;
  Catalog cat = lineitem_catalog(dir, "");

  SUBCASE("SUM over nothing is zero, one output row") {
    exec::ResultSet rs = run(kQ6, cat);
    REQUIRE(rs.rows.size() == 1);
    CHECK(rs.rows[0][0] == Value::f64(0.0));
  }
  SUBCASE("integer SUM stays integral") {
    exec::ResultSet rs = run("SELECT SUM(l_orderkey) FROM lineitem", cat);
    CHECK(rs.types[0] == ColumnType::Int32);
    CHECK(rs.rows[0][0] == Value::i64(0));
  }
  SUBCASE("projection yields no rows") {
    exec::ResultSet rs = run("SELECT l_quantity FROM lineitem", cat);
    CHECK(rs.rows.empty());
  }
}

TEST_CASE("matches a naive reference implementation") {
  std::mt19937_64 rng(2024);
  for (int iter = 0; iter < 10; ++iter) {
    CAPTURE(iter);
    test::TempDir dir;
    auto gen = [&](size_t rows, int key_range) {
      std::vector<std::array<int, 2>> data;
      std::string text;
      for (size_t i = 0; i < rows; ++i) {
        int p = int(rng() % 50), q = int(rng() % size_t(key_range));
        data.push_back({p, q});
        text += std::to_string(p) + "|" + std::to_string(q) + "\n";
      }
      return std::pair(data, text);
    };
    auto [r1, r1_text] = gen(rng() % 40, 8);
    auto [r2, r2_text] = gen(rng() % 40, 8);
    Catalog cat = r1r2_catalog(dir, r1_text, r2_text);

    // r1 holds (x, a); r2 holds (b, y). Join on a = b, filter x < 25.
    exec::ResultSet rs = run(
        "SELECT R1.x, R2.y FROM R1, R2 WHERE R1.a = R2.b AND R1.x < 25", cat);
    std::vector<std::string> expected;
    int64_t sum_x = 0;
    for (auto [x, a] : r1)
      for (auto [b, y] : r2)
        if (a == b) {
          if (x < 25)
            expected.push_back(std::to_string(x) + "|" + std::to_string(y) + "|");
          sum_x += x;
        }
    std::sort(expected.begin(), expected.end());
    CHECK(sorted_rows(rs) == expected);

    exec::ResultSet agg =
        run("SELECT SUM(R1.x) FROM R1, R2 WHERE R1.a = R2.b", cat);
    CHECK(agg.rows[0][0] == Value::i64(sum_x));
  }
}

TEST_CASE("raw scan diagnostics carry file position") {
  test::TempDir dir;

  SUBCASE("malformed integer") {
    Catalog cat = r1r2_catalog(dir, "7|1\n3|x\n", "1|9\n");
    CHECK_THROWS_WITH_AS(run("SELECT x, a FROM R1", cat),
                         doctest::Contains(":2: ordinal 1: malformed INT32 "
                                           "field 'x'"),
                         Error);
  }
  SUBCASE("malformed date and float") {
    Catalog cat = lineitem_catalog(
        dir, li_row("17", "1000.00", "0.06", "1994-13-01") + "\n");
    CHECK_THROWS_WITH_AS(run(kQ6, cat), doctest::Contains("malformed DATE"),
                         Error);
    Catalog cat2 = lineitem_catalog(
        dir, li_row("17", "1.2.3", "0.06", "1994-03-01") + "\n");
    CHECK_THROWS_WITH_AS(run(kQ6, cat2), doctest::Contains("malformed FLOAT64"),
                         Error);
  }
  SUBCASE("too few fields") {
    Catalog cat = r1r2_catalog(dir, "7\n", "1|9\n");
    CHECK_THROWS_WITH_AS(run("SELECT a FROM R1", cat),
                         doctest::Contains("too few fields (need ordinal 1)"),
                         Error);
  }
  SUBCASE("oversized row") {
    Catalog cat = r1r2_catalog(dir, std::string(70000, 'x') + "\n", "1|9\n");
    CHECK_THROWS_WITH_AS(run("SELECT x FROM R1", cat),
                         doctest::Contains("row exceeds maximum line size"),
                         Error);
  }
  SUBCASE("missing file") {
    Catalog cat;
    cat.register_table(test::r1_def(dir.file("absent.tbl")));
    try {
      run("SELECT x FROM R1", cat);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Env);
      CHECK(std::string(e.what()).find("cannot open raw file") !=
            std::string::npos);
    }
  }
}

TEST_CASE("stored scan is equivalent to the raw scan") {
  test::TempDir dir;
  Catalog cat = lineitem_catalog(dir, q6_fixture());
  const TableDef& def = cat.table("lineitem");

  std::vector<std::string> lines;
  {
    std::string all = q6_fixture();
    size_t pos = 0, nl;
    while ((nl = all.find('\n', pos)) != std::string::npos) {
      lines.push_back(all.substr(pos, nl - pos));
      pos = nl + 1;
    }
  }
  REQUIRE(lines.size() == 6);

  // Two chunks so scans cross a chunk boundary.
  std::string path = dir.file("lineitem.rqb");
  {
    storage::StoredTableWriter w(path, schema_hash(def));
    w.append(0, chunk_from_rows(def, {lines.begin(), lines.begin() + 4}));
    w.append(1, chunk_from_rows(def, {lines.begin() + 4, lines.end()}));
    CHECK(w.finalize() == 6);
  }
  storage::StoredTable table = storage::StoredTable::open(path, schema_hash(def));
  exec::ExecOptions opts;
  opts.stored[0] = &table;

  for (const char* q :
       {kQ6.c_str(), "SELECT l_quantity, l_shipdate FROM lineitem WHERE l_quantity < 24",
        "SELECT l_returnflag, l_comment FROM lineitem",
        "SELECT SUM(l_orderkey) FROM lineitem WHERE l_discount BETWEEN 0.05 AND 0.07"}) {
    CAPTURE(q);
    exec::ResultSet raw = run(q, cat);
    exec::ResultSet stored = run(q, cat, opts);
    CHECK(raw.rows == stored.rows);
    CHECK(raw.names == stored.names);
  }
}

TEST_CASE("null fields in nullable columns") {
  test::TempDir dir;
  TableDef def;
  def.name = "N";
  def.raw_path = dir.file("n.tbl");
  def.delimiter = '|';
  def.columns = {{"k", 0, ColumnType::Int32, false},
                 {"v", 1, ColumnType::Int32, true}};
  test::write_file(def.raw_path, "1|10\n2|\n3|30\n");
  Catalog cat;
  cat.register_table(def);

  SUBCASE("SUM skips NULL inputs") {
    exec::ResultSet rs = run("SELECT SUM(v) FROM N", cat);
    CHECK(rs.rows[0][0] == Value::i64(40));
  }
  SUBCASE("comparisons never pass on NULL") {
    exec::ResultSet lt = run("SELECT k FROM N WHERE v < 100", cat);
    CHECK(sorted_rows(lt) == std::vector<std::string>{"1|", "3|"});
    exec::ResultSet eq = run("SELECT k FROM N WHERE v = 10", cat);
    CHECK(sorted_rows(eq) == std::vector<std::string>{"1|"});
  }
  SUBCASE("NULL survives projection and serialization") {
    exec::ResultSet rs = run("SELECT k, v FROM N", cat);
    REQUIRE(rs.rows.size() == 3);
    CHECK(rs.rows[1][1].is_null());
    CHECK(rs.to_delimited('|') == "1|10\n2|\n3|30\n");
    CHECK(rs.to_json() == "[[1,10],[2,null],[3,30]]");
  }
  SUBCASE("NULL join keys never match") {
    TableDef m = def;
    m.name = "M";
    m.raw_path = dir.file("m.tbl");
    test::write_file(m.raw_path, "9|\n8|10\n");
    cat.register_table(m);
    exec::ResultSet rs =
        run("SELECT N.k, M.k FROM N, M WHERE N.v = M.v", cat);
    // Only the 10 = 10 pair; the two NULLs do not join.
    CHECK(sorted_rows(rs) == std::vector<std::string>{"1|8|"});
  }
}

TEST_CASE("empty text field is a value, not NULL") {
  test::TempDir dir;
  TableDef def;
  def.name = "T";
  def.raw_path = dir.file("t.tbl");
  def.delimiter = ',';
  def.columns = {{"id", 0, ColumnType::Int32, false},
                 {"s", 1, ColumnType::Text, false}};
  test::write_file(def.raw_path, "1,\n2,abc\n");
  Catalog cat;
  cat.register_table(def);

  exec::ResultSet rs = run("SELECT s FROM T", cat);
  REQUIRE(rs.rows.size() == 2);
  CHECK(rs.rows[0][0] == Value::text(""));
  CHECK(rs.rows[1][0] == Value::text("abc"));
}

TEST_CASE("date arithmetic in predicates") {
  test::TempDir dir;
  // Shipdates one year apart around the interval boundary.
  std::string rows = li_row("1", "10.00", "0.06", "1994-12-31") + "\n" +
                     li_row("1", "20.00", "0.06", "1995-01-01") + "\n";
  Catalog cat = lineitem_catalog(dir, rows);

  exec::ResultSet rs = run(
      "SELECT l_extendedprice FROM lineitem WHERE l_shipdate < DATE "
      "'1994-01-01' + INTERVAL '1' YEAR",
      cat);
  REQUIRE(rs.rows.size() == 1);
  CHECK(rs.rows[0][0] == Value::f64(10.0));
}

TEST_SUITE_END();
