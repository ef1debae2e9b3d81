#include "rawq/storage/chunk.hpp"

#include <cstring>

#include "rawq/error.hpp"

namespace rawq::storage {
namespace {

template <typename T>
void put(std::vector<uint8_t>& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  uint8_t buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));  // host is little-endian
  out.insert(out.end(), buf, buf + sizeof(T));
}

class Cursor {
 public:
  explicit Cursor(std::span<const uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    T v;
    need(sizeof(T));
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::span<const uint8_t> get_bytes(size_t n) {
    need(n);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(size_t n) {
    if (bytes_.size() - pos_ < n) throw_user("corrupt chunk: truncated data");
  }
  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
};

size_t bitmap_bytes(uint32_t rows) { return (static_cast<size_t>(rows) + 7) / 8; }

template <typename T>
T fixed_at(const ColumnData& c, uint32_t row) {
  T v;
  std::memcpy(&v, c.fixed.data() + static_cast<size_t>(row) * sizeof(T), sizeof(T));
  return v;
}

}  // namespace

Value BinaryChunk::value_at(uint32_t col, uint32_t row) const {
  const ColumnData& c = columns[col];
  if (!c.is_valid(row)) return Value::null();
  switch (c.type) {
    case ColumnType::Int32: return Value::i32(fixed_at<int32_t>(c, row));
    case ColumnType::Float64: return Value::f64(fixed_at<double>(c, row));
    case ColumnType::Date: return Value::date(fixed_at<int32_t>(c, row));
    case ColumnType::Bool: return Value::boolean(c.fixed[row] != 0);
    case ColumnType::Text: {
      auto [off, len] = c.offsets[row];
      return Value::text(c.heap.substr(off, len));
    }
  }
  throw_internal("bad column type");
}

ChunkBuilder::ChunkBuilder(std::vector<ColumnSpec> specs) : specs_(std::move(specs)) {
  chunk_.columns.resize(specs_.size());
  for (size_t i = 0; i < specs_.size(); ++i) {
    chunk_.columns[i].type = specs_[i].type;
    chunk_.columns[i].nullable = specs_[i].nullable;
  }
  appended_.assign(specs_.size(), 0);
}

void ChunkBuilder::mark(size_t col, bool valid) {
  if (appended_[col]) throw_internal("column appended twice in one row");
  appended_[col] = 1;
  ColumnData& c = chunk_.columns[col];
  if (c.nullable) {
    if (c.validity.size() < bitmap_bytes(rows_ + 1)) c.validity.push_back(0);
    if (valid) c.validity[rows_ >> 3] |= uint8_t(1u << (rows_ & 7));
  } else if (!valid) {
    throw_internal("null appended to non-nullable column");
  }
}

void ChunkBuilder::append_null(size_t col) {
  mark(col, false);
  ColumnData& c = chunk_.columns[col];
  if (c.type == ColumnType::Text) {
    c.offsets.emplace_back(static_cast<uint32_t>(c.heap.size()), 0);
  } else {
    c.fixed.insert(c.fixed.end(), fixed_width(c.type), 0);
  }
}

void ChunkBuilder::append_i32(size_t col, int32_t v) {
  mark(col, true);
  put(chunk_.columns[col].fixed, v);
}

void ChunkBuilder::append_f64(size_t col, double v) {
  mark(col, true);
  put(chunk_.columns[col].fixed, v);
}

void ChunkBuilder::append_date(size_t col, int32_t days) {
  mark(col, true);
  put(chunk_.columns[col].fixed, days);
}

void ChunkBuilder::append_bool(size_t col, bool v) {
  mark(col, true);
  chunk_.columns[col].fixed.push_back(v ? 1 : 0);
}

void ChunkBuilder::append_text(size_t col, std::string_view v) {
  mark(col, true);
  ColumnData& c = chunk_.columns[col];
  if (c.heap.size() + v.size() > UINT32_MAX) throw_user("text heap exceeds 4 GiB");
  c.offsets.emplace_back(static_cast<uint32_t>(c.heap.size()),
                         static_cast<uint32_t>(v.size()));
  c.heap.append(v);
}

void ChunkBuilder::append_value(size_t col, const Value& v) {
  if (v.is_null()) {
    append_null(col);
    return;
  }
  switch (specs_[col].type) {
    case ColumnType::Int32: append_i32(col, v.as_i32()); return;
    case ColumnType::Float64: append_f64(col, v.as_f64()); return;
    case ColumnType::Date: append_date(col, v.as_date()); return;
    case ColumnType::Bool: append_bool(col, v.as_bool()); return;
    case ColumnType::Text: append_text(col, v.as_text()); return;
  }
  throw_internal("bad column type");
}

void ChunkBuilder::next_row() {
  for (size_t i = 0; i < appended_.size(); ++i)
    if (!appended_[i]) throw_internal("row ended with missing column");
  std::fill(appended_.begin(), appended_.end(), 0);
  ++rows_;
}

BinaryChunk ChunkBuilder::finish() {
  for (size_t i = 0; i < appended_.size(); ++i)
    if (appended_[i]) throw_internal("finish() mid-row");
  chunk_.row_count = rows_;
  return std::move(chunk_);
}

std::vector<uint8_t> encode_chunk(const BinaryChunk& chunk) {
  std::vector<uint8_t> out;
  put<uint32_t>(out, chunk.row_count);
  for (const ColumnData& c : chunk.columns) {
    put<uint8_t>(out, static_cast<uint8_t>(c.type));
    put<uint8_t>(out, c.nullable ? 1 : 0);
    if (c.nullable) {
      if (c.validity.size() != bitmap_bytes(chunk.row_count))
        throw_internal("validity bitmap size mismatch");
      out.insert(out.end(), c.validity.begin(), c.validity.end());
    }
    if (c.type == ColumnType::Text) {
      if (c.offsets.size() != chunk.row_count)
        throw_internal("text offsets size mismatch");
      for (auto [off, len] : c.offsets) {
        put<uint32_t>(out, off);
        put<uint32_t>(out, len);
      }
      put<uint64_t>(out, c.heap.size());
      out.insert(out.end(), c.heap.begin(), c.heap.end());
    } else {
      size_t want = static_cast<size_t>(chunk.row_count) * fixed_width(c.type);
      if (c.fixed.size() != want) throw_internal("fixed data size mismatch");
      out.insert(out.end(), c.fixed.begin(), c.fixed.end());
    }
  }
  return out;
}

BinaryChunk decode_chunk(std::span<const uint8_t> bytes) {
  Cursor cur(bytes);
  BinaryChunk chunk;
  chunk.row_count = cur.get<uint32_t>();
  while (!cur.done()) {
    ColumnData c;
    uint8_t tag = cur.get<uint8_t>();
    if (tag > static_cast<uint8_t>(ColumnType::Bool))
      throw_user("corrupt chunk: unknown column type tag " + std::to_string(tag));
    c.type = static_cast<ColumnType>(tag);
    uint8_t nullable = cur.get<uint8_t>();
    if (nullable > 1) throw_user("corrupt chunk: bad nullable flag");
    c.nullable = nullable == 1;
    if (c.nullable) {
      auto bm = cur.get_bytes(bitmap_bytes(chunk.row_count));
      c.validity.assign(bm.begin(), bm.end());
    }
    if (c.type == ColumnType::Text) {
      c.offsets.reserve(chunk.row_count);
      for (uint32_t r = 0; r < chunk.row_count; ++r) {
        uint32_t off = cur.get<uint32_t>();
        uint32_t len = cur.get<uint32_t>();
        c.offsets.emplace_back(off, len);
      }
      uint64_t heap_len = cur.get<uint64_t>();
      auto heap = cur.get_bytes(heap_len);
      c.heap.assign(heap.begin(), heap.end());
      for (auto [off, len] : c.offsets)
        if (static_cast<uint64_t>(off) + len > c.heap.size())
          throw_user("corrupt chunk: text slice out of heap bounds");
    } else {
      auto data = cur.get_bytes(static_cast<size_t>(chunk.row_count) *
                                fixed_width(c.type));
      c.fixed.assign(data.begin(), data.end());
    }
    chunk.columns.push_back(std::move(c));
  }
  return chunk;
}

}  // namespace rawq::storage
