#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace rawq::storage {

// One positional-map entry: byte offset from row start and slice length.
// Slices never include the delimiter or the newline.
struct FieldSlice {
  uint32_t start = 0;
  uint32_t len = 0;
};

enum class TokenizeStatus { Ok, TooFewFields };

// Extracts the fields at `needed` ordinals (sorted ascending) from one row,
// stopping right after the last needed ordinal. `row` excludes the newline.
// With trailing_delimiter, a delimiter ending the row closes the last field
// instead of opening an empty one.
TokenizeStatus tokenize_row(std::string_view row, char delimiter,
                            bool trailing_delimiter,
                            std::span<const uint32_t> needed,
                            std::span<FieldSlice> out);

}  // namespace rawq::storage
