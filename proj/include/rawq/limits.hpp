#pragma once

#include <cstdint>

namespace rawq {

// Hard cap on a single raw text row; longer rows are rejected as malformed.
inline constexpr uint32_t kMaxLineSize = 65536;

// Default text chunk size for the streaming readers; chunks are extended to
// the next newline so rows never split.
inline constexpr uint64_t kDefaultChunkBytes = 16ull << 20;

// Upper bound on the generated kernels' gather/apply group size; keeps the
// staging buffers a bounded memory cost.
inline constexpr uint32_t kMaxBatchRows = 65536;

}  // namespace rawq
