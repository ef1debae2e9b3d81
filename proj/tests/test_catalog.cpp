#include <doctest.h>

#include "rawq/catalog.hpp"
#include "rawq/error.hpp"
#include "test_util.hpp"

using namespace rawq;

TEST_SUITE_BEGIN("catalog");

TEST_CASE("register and resolve lineitem") {
  Catalog cat;
  cat.register_table(test::lineitem_def("/data/lineitem.tbl"));

  auto rc = cat.resolve("lineitem", "l_discount");
  REQUIRE(rc);
  CHECK(rc->ordinal == 6);
  CHECK(rc->type == ColumnType::Float64);
  CHECK(!rc->nullable);

  // Lookups are case-insensitive.
  auto up = cat.resolve("LINEITEM", "L_ORDERKEY");
  REQUIRE(up);
  CHECK(up->ordinal == 0);
  CHECK(up->type == ColumnType::Int32);

  CHECK(!cat.resolve("lineitem", "nope"));
  CHECK_THROWS_AS((void)cat.table("widgets"), Error);
}

TEST_CASE("registration validation") {
  Catalog cat;
  TableDef def = test::lineitem_def("x.tbl");

  SUBCASE("duplicate table name") {
    cat.register_table(def);
    TableDef again = def;
    again.name = "LineItem";  // case-insensitively equal
    CHECK_THROWS_AS(cat.register_table(again), Error);
  }
  SUBCASE("duplicate column name") {
    def.columns[1].name = "L_ORDERKEY";
    CHECK_THROWS_AS(cat.register_table(def), Error);
  }
  SUBCASE("non-sequential ordinals") {
    def.columns[3].ordinal = 9;
    CHECK_THROWS_AS(cat.register_table(def), Error);
  }
  SUBCASE("newline delimiter") {
    def.delimiter = '\n';
    CHECK_THROWS_AS(cat.register_table(def), Error);
  }
  SUBCASE("no columns") {
    def.columns.clear();
    CHECK_THROWS_AS(cat.register_table(def), Error);
  }
}

TEST_CASE("stats defaults and validation") {
  Catalog cat;
  cat.register_table(test::r1_def("r1.tbl"));

  const TableStats& empty = cat.stats("r1");
  CHECK(empty.row_count == 0);

  TableStats s;
  s.row_count = 100;
  s.distinct_counts = {10, 100};
  SUBCASE("valid stats accepted") {
    cat.update_stats("R1", s);
    CHECK(cat.stats("r1").row_count == 100);
    CHECK(cat.stats("r1").distinct_counts[0] == 10);
  }
  SUBCASE("distinct count above row count rejected") {
    s.distinct_counts[0] = 101;
    CHECK_THROWS_AS(cat.update_stats("R1", s), Error);
  }
}

TEST_CASE("save/load round trip") {
  test::TempDir dir;
  auto path = dir.file("catalog.json");
  {
    Catalog cat;
    cat.register_table(test::lineitem_def("/data/lineitem.tbl"));
    cat.register_table(test::r1_def("/data/r1.csv"));
    TableStats s;
    s.row_count = 6;
    s.distinct_counts.assign(16, 1);
    s.distinct_counts[0] = 6;
    s.min_max.resize(16);
    s.min_max[0] = MinMax{Value::i32(1), Value::i32(6)};
    s.min_max[10] = MinMax{Value::date(8766), Value::date(9500)};
    cat.update_stats("lineitem", s);
    cat.save(path);
  }
  Catalog loaded = Catalog::load(path);
  CHECK(loaded.table_names() == std::vector<std::string>{"lineitem", "R1"});
  CHECK(loaded.table("lineitem").delimiter == '|');
  CHECK(loaded.table("lineitem").trailing_delimiter);
  CHECK(loaded.table("R1").columns[1].name == "a");
  const TableStats& s = loaded.stats("lineitem");
  CHECK(s.row_count == 6);
  REQUIRE(s.min_max.size() == 16);
  REQUIRE(s.min_max[10].has_value());
  CHECK(s.min_max[10]->min == Value::date(8766));
  CHECK(s.min_max[0]->max == Value::i32(6));
  CHECK(!s.min_max[3].has_value());
}

TEST_CASE("load errors") {
  test::TempDir dir;
  CHECK_THROWS_AS(Catalog::load(dir.file("missing.json")), Error);
  auto bad = dir.file("bad.json");
  test::write_file(bad, "{not json");
  CHECK_THROWS_AS(Catalog::load(bad), Error);
}

TEST_CASE("schema hash tracks shape") {
  TableDef a = test::lineitem_def("x");
  uint64_t h = schema_hash(a);
  CHECK(h == schema_hash(a));

  TableDef b = a;
  b.columns[0].type = ColumnType::Float64;
  CHECK(schema_hash(b) != h);

  TableDef c = a;
  c.columns[0].nullable = true;
  CHECK(schema_hash(c) != h);

  // Projection-restricted hash differs from the full one and is order-stable.
  std::vector<uint32_t> proj{4, 5, 6, 10};
  CHECK(schema_hash(a, proj) != h);
  CHECK(schema_hash(a, proj) == schema_hash(a, proj));
}

TEST_SUITE_END();
