#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "rawq/catalog.hpp"

namespace rawq::test {

struct TempDir {
  std::filesystem::path path;

  TempDir() {
    auto base = std::filesystem::temp_directory_path();
    std::mt19937_64 rng(std::random_device{}());
    for (int i = 0; i < 100; ++i) {
      auto p = base / ("rawq_test_" + std::to_string(rng()));
      std::error_code ec;
      if (std::filesystem::create_directory(p, ec)) {
        path = p;
        return;
      }
    }
    throw std::runtime_error("cannot create temp dir");
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  out.close();
  if (!out) throw std::runtime_error("write_file failed: " + path);
}

inline TableDef lineitem_def(const std::string& raw_path) {
  TableDef def;
  def.name = "lineitem";
  def.raw_path = raw_path;
  def.delimiter = '|';
  def.trailing_delimiter = true;
  auto add = [&](const char* name, ColumnType type) {
    ColumnDef c;
    c.name = name;
    c.ordinal = static_cast<uint32_t>(def.columns.size());
    c.type = type;
    c.nullable = false;
    def.columns.push_back(std::move(c));
  };
  add("l_orderkey", ColumnType::Int32);
  add("l_partkey", ColumnType::Int32);
  add("l_suppkey", ColumnType::Int32);
  add("l_linenumber", ColumnType::Int32);
  add("l_quantity", ColumnType::Float64);
  add("l_extendedprice", ColumnType::Float64);
  add("l_discount", ColumnType::Float64);
  add("l_tax", ColumnType::Float64);
  add("l_returnflag", ColumnType::Text);
  add("l_linestatus", ColumnType::Text);
  add("l_shipdate", ColumnType::Date);
  add("l_commitdate", ColumnType::Date);
  add("l_receiptdate", ColumnType::Date);
  add("l_shipinstruct", ColumnType::Text);
  add("l_shipmode", ColumnType::Text);
  add("l_comment", ColumnType::Text);
  return def;
}

// Two-table fixture: R1(x INT32, a INT32), R2(b INT32, y INT32).
inline TableDef r1_def(const std::string& raw_path) {
  TableDef def;
  def.name = "R1";
  def.raw_path = raw_path;
  def.delimiter = '|';
  def.trailing_delimiter = false;
  def.columns = {{"x", 0, ColumnType::Int32, false},
                 {"a", 1, ColumnType::Int32, false}};
  return def;
}

inline TableDef r2_def(const std::string& raw_path) {
  TableDef def;
  def.name = "R2";
  def.raw_path = raw_path;
  def.delimiter = '|';
  def.trailing_delimiter = false;
  def.columns = {{"b", 0, ColumnType::Int32, false},
                 {"y", 1, ColumnType::Int32, false}};
  return def;
}

}  // namespace rawq::test
