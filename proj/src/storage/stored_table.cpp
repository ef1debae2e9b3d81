#include "rawq/storage/stored_table.hpp"

#include <cstring>

#include "rawq/error.hpp"

namespace rawq::storage {
namespace {

template <typename T>
void write_le(std::ostream& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw_user("stored table truncated");
  return v;
}

}  // namespace

StoredTableWriter::StoredTableWriter(std::filesystem::path path,
                                     uint64_t schema_hash)
    : path_(std::move(path)),
      temp_path_(path_.string() + ".data"),
      schema_hash_(schema_hash) {
  temp_.open(temp_path_, std::ios::binary | std::ios::trunc);
  if (!temp_) throw_env("cannot create " + temp_path_.string());
}

StoredTableWriter::~StoredTableWriter() {
  if (open_) abort();
}

void StoredTableWriter::append(uint64_t chunk_id, const BinaryChunk& chunk) {
  append_encoded(chunk_id, encode_chunk(chunk), chunk.row_count);
}

void StoredTableWriter::append_encoded(uint64_t chunk_id,
                                       std::span<const uint8_t> bytes,
                                       uint32_t rows) {
  if (!open_) throw_internal("append after finalize");
  if (entries_.count(chunk_id)) throw_internal("duplicate chunk id");
  temp_.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
  if (!temp_) throw_env("write failed on " + temp_path_.string());
  entries_[chunk_id] = Entry{temp_bytes_, bytes.size(), rows};
  temp_bytes_ += bytes.size();
}

uint64_t StoredTableWriter::finalize() {
  if (!open_) throw_internal("finalize twice");
  temp_.flush();
  temp_.close();
  if (temp_.fail()) throw_env("flush failed on " + temp_path_.string());

  uint64_t expected = 0;
  for (const auto& [id, e] : entries_) {
    if (id != expected) throw_internal("chunk ids are not dense");
    ++expected;
  }

  std::ofstream out(path_, std::ios::binary | std::ios::trunc);
  if (!out) throw_env("cannot create " + path_.string());
  out.write(kMagic, 4);
  write_le<uint32_t>(out, kFormatVersion);
  write_le<uint64_t>(out, schema_hash_);
  write_le<uint32_t>(out, static_cast<uint32_t>(entries_.size()));

  // Appends may arrive in any order; the final layout is id order, so the
  // directory offsets are computed cumulatively, not from temp positions.
  uint64_t data_base = 4 + 4 + 8 + 4 + entries_.size() * 12;
  uint64_t total_rows = 0;
  uint64_t running = 0;
  for (const auto& [id, e] : entries_) {
    write_le<uint64_t>(out, data_base + running);
    write_le<uint32_t>(out, e.rows);
    running += e.size;
    total_rows += e.rows;
  }

  std::ifstream temp_in(temp_path_, std::ios::binary);
  if (!temp_in) throw_env("cannot reopen " + temp_path_.string());
  std::vector<char> buf;
  for (const auto& [id, e] : entries_) {
    buf.resize(e.size);
    temp_in.seekg(static_cast<std::streamoff>(e.data_offset));
    temp_in.read(buf.data(), static_cast<std::streamsize>(e.size));
    if (!temp_in) throw_env("read failed on " + temp_path_.string());
    out.write(buf.data(), static_cast<std::streamsize>(e.size));
  }
  out.flush();
  if (!out) throw_env("write failed on " + path_.string());
  out.close();
  temp_in.close();

  open_ = false;
  std::error_code ec;
  std::filesystem::remove(temp_path_, ec);
  return total_rows;
}

void StoredTableWriter::abort() {
  if (!open_) return;
  open_ = false;
  temp_.close();
  std::error_code ec;
  std::filesystem::remove(temp_path_, ec);
}

StoredTable StoredTable::open(const std::filesystem::path& path,
                              uint64_t expected_schema_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_env("cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw_user(path.string() + " is not a rawq binary table");
  uint32_t version = read_le<uint32_t>(in);
  if (version != kFormatVersion)
    throw_user("unsupported table format version " + std::to_string(version));
  uint64_t schema_hash = read_le<uint64_t>(in);
  if (schema_hash != expected_schema_hash) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%016llx, expected %016llx",
                  static_cast<unsigned long long>(schema_hash),
                  static_cast<unsigned long long>(expected_schema_hash));
    throw_user("schema hash mismatch in " + path.string() + ": " + buf);
  }
  uint32_t chunk_count = read_le<uint32_t>(in);

  StoredTable t;
  t.path_ = path;
  t.file_size_ = std::filesystem::file_size(path);
  t.directory_.reserve(chunk_count);
  uint64_t prev_offset = 0;
  for (uint32_t i = 0; i < chunk_count; ++i) {
    Entry e;
    e.offset = read_le<uint64_t>(in);
    e.rows = read_le<uint32_t>(in);
    if (e.offset < prev_offset || e.offset > t.file_size_)
      throw_user("stored table directory is corrupt");
    prev_offset = e.offset;
    t.directory_.push_back(e);
  }
  return t;
}

uint64_t StoredTable::row_count() const {
  uint64_t n = 0;
  for (const Entry& e : directory_) n += e.rows;
  return n;
}

BinaryChunk StoredTable::read_chunk(uint32_t idx) const {
  if (idx >= directory_.size()) throw_internal("chunk index out of range");
  uint64_t begin = directory_[idx].offset;
  uint64_t end = idx + 1 < directory_.size() ? directory_[idx + 1].offset
                                             : file_size_;
  if (end < begin) throw_user("stored table directory is corrupt");
  std::ifstream in(path_, std::ios::binary);
  if (!in) throw_env("cannot open " + path_.string());
  in.seekg(static_cast<std::streamoff>(begin));
  std::vector<uint8_t> bytes(end - begin);
  in.read(reinterpret_cast<char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!in) throw_user("stored table truncated");
  BinaryChunk chunk = decode_chunk(bytes);
  if (chunk.row_count != directory_[idx].rows)
    throw_user("stored table directory row count mismatch");
  return chunk;
}

}  // namespace rawq::storage
