#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rawq/types.hpp"

namespace rawq {

struct ColumnDef {
  std::string name;
  uint32_t ordinal = 0;
  ColumnType type = ColumnType::Int32;
  bool nullable = false;  // non-null unless opted in
};

struct TableDef {
  std::string name;
  std::vector<ColumnDef> columns;
  char delimiter = ',';
  std::string raw_path;
  // TPC-H style rows end "...|\n"; plain CSV rows end with the last field.
  bool trailing_delimiter = false;
};

// Optional per-column (min, max) in the column's value domain.
struct MinMax {
  Value min;
  Value max;
};

struct TableStats {
  uint64_t row_count = 0;                       // T(R)
  std::vector<uint64_t> distinct_counts;        // V(c, R), per ordinal
  std::vector<std::optional<MinMax>> min_max;   // per ordinal

  // Resizes per-column vectors to the table width, keeping existing entries.
  void fit(size_t column_count);
};

struct ResolvedColumn {
  uint32_t ordinal;
  ColumnType type;
  bool nullable;
};

// Table schemas, raw-file bindings and statistics. Read-mostly: lookups are
// safe to run concurrently; registration and stats updates take the write
// lock.
class Catalog {
 public:
  Catalog() = default;
  // Movable so loaders can return by value; the mutex itself is not moved.
  // Moving a catalog that other threads are still reading is a caller bug.
  Catalog(Catalog&& other) noexcept
      : entries_(std::move(other.entries_)), by_name_(std::move(other.by_name_)) {}
  Catalog& operator=(Catalog&& other) noexcept {
    entries_ = std::move(other.entries_);
    by_name_ = std::move(other.by_name_);
    return *this;
  }

  // Validates the definition (ordinals 0..n-1, unique names, legal
  // delimiter) and registers it. Missing stats default to all zeros.
  void register_table(TableDef def, std::optional<TableStats> stats = {});

  void update_stats(std::string_view table, TableStats stats);

  bool has_table(std::string_view table) const;

  // Definitions are immutable once registered and entries are never removed,
  // so the reference stays valid for the catalog's lifetime. Throws for
  // unknown tables.
  const TableDef& table(std::string_view name) const;
  TableStats stats(std::string_view table) const;

  // nullopt for an unknown column; throws for an unknown table.
  std::optional<ResolvedColumn> resolve(std::string_view table,
                                        std::string_view column) const;

  std::vector<std::string> table_names() const;

  // Hash over the schema-relevant parts of the definition (name, columns,
  // delimiter framing); independent of stats and file paths.
  uint64_t schema_hash(std::string_view table) const;

  // catalog.json: a JSON array of tables (see README for the layout).
  void save(const std::string& path) const;
  static Catalog load(const std::string& path);

  std::string to_json() const;
  static Catalog from_json(std::string_view text);

 private:
  struct Entry {
    TableDef def;
    TableStats stats;
  };

  static void validate_def(const TableDef& def);
  static void validate_stats(const TableDef& def, const TableStats& stats);
  const Entry& entry(std::string_view table) const;

  mutable std::shared_mutex mu_;
  std::vector<std::unique_ptr<Entry>> entries_;          // registration order
  std::unordered_map<std::string, Entry*> by_name_;      // lower-cased name
};

// Case-insensitive identifier handling: names compare and hash lower-cased.
std::string to_lower(std::string_view s);

uint64_t schema_hash(const TableDef& def);

// Schema hash extended with a projection; keys stored-table files.
uint64_t schema_hash(const TableDef& def, const std::vector<uint32_t>& projection);

}  // namespace rawq
