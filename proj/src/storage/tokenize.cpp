#include "rawq/storage/tokenize.hpp"

#include <cstring>

namespace rawq::storage {

TokenizeStatus tokenize_row(std::string_view row, char delimiter,
                            bool trailing_delimiter,
                            std::span<const uint32_t> needed,
                            std::span<FieldSlice> out) {
  if (trailing_delimiter && !row.empty() && row.back() == delimiter)
    row.remove_suffix(1);
  size_t pos = 0;
  uint32_t field = 0;
  size_t next_needed = 0;
  while (next_needed < needed.size()) {
    if (pos > row.size()) return TokenizeStatus::TooFewFields;
    const char* hit = static_cast<const char*>(
        std::memchr(row.data() + pos, delimiter, row.size() - pos));
    size_t end = hit ? static_cast<size_t>(hit - row.data()) : row.size();
    if (field == needed[next_needed]) {
      out[next_needed].start = static_cast<uint32_t>(pos);
      out[next_needed].len = static_cast<uint32_t>(end - pos);
      ++next_needed;
    }
    if (!hit && next_needed < needed.size()) return TokenizeStatus::TooFewFields;
    pos = end + 1;
    ++field;
  }
  return TokenizeStatus::Ok;
}

}  // namespace rawq::storage
