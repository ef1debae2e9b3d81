#include "rawq/catalog.hpp"

#include <cctype>
#include <fstream>
#include <mutex>
#include <unordered_set>

#include <json.hpp>

#include "rawq/dates.hpp"
#include "rawq/error.hpp"
#include "rawq/hash.hpp"

namespace rawq {

using nlohmann::json;

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

void TableStats::fit(size_t n) {
  distinct_counts.resize(n, 0);
  min_max.resize(n);
}

void Catalog::validate_def(const TableDef& def) {
  if (def.name.empty()) throw_user("table name must not be empty");
  if (def.columns.empty())
    throw_user("table '" + def.name + "' must have at least one column");
  if (def.delimiter == '\n' || def.delimiter == '\r')
    throw_user("table '" + def.name + "': delimiter may not be a line break");
  std::unordered_set<std::string> names;
  for (size_t i = 0; i < def.columns.size(); ++i) {
    const ColumnDef& c = def.columns[i];
    if (c.ordinal != i)
      throw_user("table '" + def.name + "': column '" + c.name +
                 "' has ordinal " + std::to_string(c.ordinal) + ", expected " +
                 std::to_string(i));
    if (c.name.empty())
      throw_user("table '" + def.name + "': column names must not be empty");
    if (!names.insert(to_lower(c.name)).second)
      throw_user("table '" + def.name + "': duplicate column name '" + c.name +
                 "' (names are case-insensitive)");
  }
}

void Catalog::validate_stats(const TableDef& def, const TableStats& stats) {
  if (stats.distinct_counts.size() > def.columns.size() ||
      stats.min_max.size() > def.columns.size())
    throw_user("stats for '" + def.name + "' cover more columns than the table has");
  for (size_t i = 0; i < stats.distinct_counts.size(); ++i) {
    if (stats.distinct_counts[i] > stats.row_count)
      throw_user("stats for '" + def.name + "': distinct count of column '" +
                 def.columns[i].name + "' (" +
                 std::to_string(stats.distinct_counts[i]) +
                 ") exceeds row count (" + std::to_string(stats.row_count) + ")");
  }
}

void Catalog::register_table(TableDef def, std::optional<TableStats> stats) {
  validate_def(def);
  TableStats st = stats.value_or(TableStats{});
  validate_stats(def, st);
  st.fit(def.columns.size());

  std::unique_lock lock(mu_);
  std::string key = to_lower(def.name);
  if (by_name_.count(key))
    throw_user("table '" + def.name + "' is already registered");
  auto e = std::make_unique<Entry>(Entry{std::move(def), std::move(st)});
  by_name_[key] = e.get();
  entries_.push_back(std::move(e));
}

void Catalog::update_stats(std::string_view table, TableStats stats) {
  std::unique_lock lock(mu_);
  auto it = by_name_.find(to_lower(table));
  if (it == by_name_.end())
    throw_user("unknown table '" + std::string(table) + "'");
  validate_stats(it->second->def, stats);
  stats.fit(it->second->def.columns.size());
  it->second->stats = std::move(stats);
}

const Catalog::Entry& Catalog::entry(std::string_view table) const {
  auto it = by_name_.find(to_lower(table));
  if (it == by_name_.end())
    throw_user("unknown table '" + std::string(table) + "'");
  return *it->second;
}

bool Catalog::has_table(std::string_view table) const {
  std::shared_lock lock(mu_);
  return by_name_.count(to_lower(table)) != 0;
}

const TableDef& Catalog::table(std::string_view name) const {
  std::shared_lock lock(mu_);
  return entry(name).def;
}

TableStats Catalog::stats(std::string_view table) const {
  std::shared_lock lock(mu_);
  return entry(table).stats;
}

std::optional<ResolvedColumn> Catalog::resolve(std::string_view table,
                                               std::string_view column) const {
  std::shared_lock lock(mu_);
  const Entry& e = entry(table);
  std::string want = to_lower(column);
  for (const ColumnDef& c : e.def.columns) {
    if (to_lower(c.name) == want)
      return ResolvedColumn{c.ordinal, c.type, c.nullable};
  }
  return std::nullopt;
}

std::vector<std::string> Catalog::table_names() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e->def.name);
  return out;
}

uint64_t schema_hash(const TableDef& def) {
  uint64_t h = fnv1a64(to_lower(def.name));
  h = fnv1a64(&def.delimiter, 1, h);
  uint8_t trail = def.trailing_delimiter ? 1 : 0;
  h = fnv1a64(&trail, 1, h);
  for (const ColumnDef& c : def.columns) {
    h = fnv1a64(to_lower(c.name), h);
    uint8_t t = static_cast<uint8_t>(c.type);
    uint8_t n = c.nullable ? 1 : 0;
    h = fnv1a64(&t, 1, h);
    h = fnv1a64(&n, 1, h);
  }
  return h;
}

uint64_t schema_hash(const TableDef& def, const std::vector<uint32_t>& projection) {
  uint64_t h = schema_hash(def);
  for (uint32_t ord : projection) {
    h = fnv1a64(&ord, sizeof ord, h);
  }
  return h;
}

uint64_t Catalog::schema_hash(std::string_view table) const {
  std::shared_lock lock(mu_);
  return rawq::schema_hash(entry(table).def);
}

namespace {

json value_to_json(const Value& v) {
  if (v.is_null()) return nullptr;
  switch (v.type()) {
    case ColumnType::Int32: return v.as_i64();
    case ColumnType::Float64: return v.as_f64();
    case ColumnType::Text: return v.as_text();
    case ColumnType::Date: return v.as_date();
    case ColumnType::Bool: return v.as_bool();
  }
  return nullptr;
}

Value value_from_json(const json& j, ColumnType type) {
  switch (type) {
    case ColumnType::Int32: return Value::i64(j.get<int64_t>());
    case ColumnType::Float64: return Value::f64(j.get<double>());
    case ColumnType::Text: return Value::text(j.get<std::string>());
    case ColumnType::Date: return Value::date(j.get<int32_t>());
    case ColumnType::Bool: return Value::boolean(j.get<bool>());
  }
  throw_internal("bad column type in catalog json");
}

}  // namespace

std::string Catalog::to_json() const {
  std::shared_lock lock(mu_);
  json arr = json::array();
  for (const auto& e : entries_) {
    const TableDef& d = e->def;
    const TableStats& s = e->stats;
    json cols = json::array();
    for (const ColumnDef& c : d.columns) {
      cols.push_back({{"name", c.name},
                      {"type", std::string(type_name(c.type))},
                      {"nullable", c.nullable}});
    }
    json mm = json::array();
    for (size_t i = 0; i < s.min_max.size(); ++i) {
      if (!s.min_max[i]) {
        mm.push_back(nullptr);
      } else {
        mm.push_back(json::array(
            {value_to_json(s.min_max[i]->min), value_to_json(s.min_max[i]->max)}));
      }
    }
    arr.push_back({{"name", d.name},
                   {"raw_path", d.raw_path},
                   {"delimiter", static_cast<int>(d.delimiter)},
                   {"trailing_delimiter", d.trailing_delimiter},
                   {"columns", cols},
                   {"stats",
                    {{"row_count", s.row_count},
                     {"distinct_counts", s.distinct_counts},
                     {"min_max", mm}}}});
  }
  return arr.dump(2);
}

Catalog Catalog::from_json(std::string_view text) {
  Catalog cat;
  json arr = json::parse(text);
  if (!arr.is_array()) throw_user("catalog json: top level must be an array");
  for (const json& t : arr) {
    TableDef def;
    def.name = t.at("name").get<std::string>();
    def.raw_path = t.value("raw_path", std::string());
    def.delimiter = static_cast<char>(t.at("delimiter").get<int>());
    def.trailing_delimiter = t.value("trailing_delimiter", false);
    uint32_t ord = 0;
    for (const json& c : t.at("columns")) {
      ColumnDef col;
      col.name = c.at("name").get<std::string>();
      col.ordinal = ord++;
      auto ty = type_from_name(c.at("type").get<std::string>());
      if (!ty) throw_user("catalog json: unknown type '" +
                          c.at("type").get<std::string>() + "'");
      col.type = *ty;
      col.nullable = c.value("nullable", false);
      def.columns.push_back(std::move(col));
    }
    TableStats stats;
    if (t.contains("stats")) {
      const json& s = t.at("stats");
      stats.row_count = s.value("row_count", uint64_t{0});
      if (s.contains("distinct_counts"))
        stats.distinct_counts = s.at("distinct_counts").get<std::vector<uint64_t>>();
      if (s.contains("min_max")) {
        size_t i = 0;
        for (const json& m : s.at("min_max")) {
          if (i >= def.columns.size()) break;
          if (m.is_null()) {
            stats.min_max.emplace_back(std::nullopt);
          } else {
            stats.min_max.push_back(MinMax{
                value_from_json(m.at(0), def.columns[i].type),
                value_from_json(m.at(1), def.columns[i].type)});
          }
          ++i;
        }
      }
    }
    cat.register_table(std::move(def), std::move(stats));
  }
  return cat;
}

void Catalog::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw_env("cannot write catalog file '" + path + "'");
  out << to_json() << "\n";
}

Catalog Catalog::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_env("cannot read catalog file '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  try {
    return from_json(text);
  } catch (const json::exception& e) {
    throw_user("catalog file '" + path + "' is not valid json: " + e.what());
  }
}

}  // namespace rawq
