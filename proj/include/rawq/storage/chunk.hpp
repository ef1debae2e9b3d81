#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rawq/types.hpp"

namespace rawq::storage {

// One column of a chunk. Fixed-width types hold little-endian arrays in
// `fixed` (INT32/DATE 4 bytes, FLOAT64 8, BOOL 1). TEXT holds (offset, len)
// pairs into `heap`. When nullable, `validity` has ceil(rows/8) bytes,
// LSB-first, set bit = value present; null slots stay zeroed in the data.
struct ColumnData {
  ColumnType type = ColumnType::Int32;
  bool nullable = false;
  std::vector<uint8_t> validity;
  std::vector<uint8_t> fixed;
  std::vector<std::pair<uint32_t, uint32_t>> offsets;
  std::string heap;

  bool is_valid(uint32_t row) const {
    if (!nullable) return true;
    return (validity[row >> 3] >> (row & 7)) & 1;
  }
};

struct BinaryChunk {
  uint32_t row_count = 0;
  std::vector<ColumnData> columns;

  Value value_at(uint32_t col, uint32_t row) const;
};

// Row-at-a-time builder; every column must be appended exactly once per row.
class ChunkBuilder {
 public:
  struct ColumnSpec {
    ColumnType type;
    bool nullable;
  };

  explicit ChunkBuilder(std::vector<ColumnSpec> specs);

  void append_null(size_t col);
  void append_i32(size_t col, int32_t v);
  void append_f64(size_t col, double v);
  void append_date(size_t col, int32_t days);
  void append_bool(size_t col, bool v);
  void append_text(size_t col, std::string_view v);
  void append_value(size_t col, const Value& v);

  // Ends the current row; throws Internal if a column was skipped.
  void next_row();

  uint32_t row_count() const { return rows_; }
  BinaryChunk finish();

 private:
  void mark(size_t col, bool valid);

  std::vector<ColumnSpec> specs_;
  BinaryChunk chunk_;
  std::vector<uint8_t> appended_;  // per-column flag for the open row
  uint32_t rows_ = 0;
};

// Wire form: u32 row_count, then per column u8 type tag, u8 nullable flag,
// validity bitmap when nullable, then the data (TEXT: pairs, u64 heap length,
// heap bytes). All integers little-endian.
std::vector<uint8_t> encode_chunk(const BinaryChunk& chunk);

// Strict decode; throws Error(User) on truncation or malformed content.
BinaryChunk decode_chunk(std::span<const uint8_t> bytes);

}  // namespace rawq::storage
