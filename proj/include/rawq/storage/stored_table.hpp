#pragma once

#include <filesystem>
#include <fstream>
#include <map>

#include "rawq/storage/chunk.hpp"

namespace rawq::storage {

// File layout: "RQB1" magic, u32 version, u64 schema hash, u32 chunk count,
// directory of (u64 absolute offset, u32 rows) per chunk, then the encoded
// chunks. Little-endian throughout.
inline constexpr char kMagic[4] = {'R', 'Q', 'B', '1'};
inline constexpr uint32_t kFormatVersion = 1;

// Streams encoded chunks into a side file so writing can start before the
// chunk count is known; finalize() assembles header + directory + data.
class StoredTableWriter {
 public:
  StoredTableWriter(std::filesystem::path path, uint64_t schema_hash);
  ~StoredTableWriter();

  StoredTableWriter(const StoredTableWriter&) = delete;
  StoredTableWriter& operator=(const StoredTableWriter&) = delete;

  // Chunk ids order the directory; ids must end up dense 0..n-1.
  void append(uint64_t chunk_id, const BinaryChunk& chunk);
  void append_encoded(uint64_t chunk_id, std::span<const uint8_t> bytes,
                      uint32_t rows);

  uint64_t finalize();  // returns total rows; writer unusable afterwards
  void abort();         // removes the side file

 private:
  struct Entry {
    uint64_t data_offset;  // within the side file
    uint64_t size;
    uint32_t rows;
  };
  std::filesystem::path path_;
  std::filesystem::path temp_path_;
  std::ofstream temp_;
  uint64_t schema_hash_;
  uint64_t temp_bytes_ = 0;
  std::map<uint64_t, Entry> entries_;
  bool open_ = true;
};

class StoredTable {
 public:
  // Validates magic, version, and the schema hash.
  static StoredTable open(const std::filesystem::path& path,
                          uint64_t expected_schema_hash);

  uint32_t chunk_count() const { return static_cast<uint32_t>(directory_.size()); }
  uint64_t row_count() const;
  uint32_t chunk_rows(uint32_t idx) const { return directory_[idx].rows; }
  BinaryChunk read_chunk(uint32_t idx) const;

  const std::filesystem::path& path() const { return path_; }

 private:
  struct Entry {
    uint64_t offset;
    uint32_t rows;
  };
  std::filesystem::path path_;
  uint64_t file_size_ = 0;
  std::vector<Entry> directory_;
};

}  // namespace rawq::storage
