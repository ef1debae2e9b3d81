#pragma once

#include <cstdint>

namespace rawq::codegen {

// Call protocol between the host and a generated kernel. The kernel exports
// one symbol, `rawq_run_<signature hex>`, taking a RawqCall*. The generated
// source carries a byte-identical copy of this struct; both sides are
// compiled for the same ABI on the same machine.
//
// Op sequence for one query:
//   INIT once; PROCESS per text chunk in pipeline order (table selects the
//   pipeline); FINISH once; SIZES once; FETCH once into buffers sized per
//   SIZES; DESTROY once. State lives behind the host-owned `state` slot.
enum : int64_t {
  kOpInit = 0,
  kOpProcess = 1,
  kOpFinish = 2,
  kOpSizes = 3,
  kOpFetch = 4,
  kOpDestroy = 5,
};

// Kernel-detected data errors, low byte of the error slot.
enum : uint64_t {
  kErrMalformedField = 1,
  kErrTooFewFields = 2,
  kErrRowTooLong = 3,
};

inline uint64_t encode_kernel_error(uint64_t row, uint32_t ordinal,
                                    uint64_t code) {
  return (row << 24) | (uint64_t{ordinal} << 8) | code;
}
inline uint64_t kernel_error_row(uint64_t e) { return e >> 24; }
inline uint32_t kernel_error_ordinal(uint64_t e) {
  return static_cast<uint32_t>((e >> 8) & 0xffff);
}
inline uint64_t kernel_error_code(uint64_t e) { return e & 0xff; }

struct RawqCall {
  int64_t op = 0;
  int64_t table = 0;          // PROCESS: base-table index of the chunk
  const char* text = nullptr; // PROCESS: whole rows, newline-terminated
  uint64_t text_len = 0;

  // Literal values when the kernel was generated without inlined constants,
  // in the generator's emission order; unused (null) otherwise. Passed to
  // INIT, which copies what it needs.
  const int64_t* int_params = nullptr;    // IntLit, DateLit (days)
  const double* float_params = nullptr;   // FloatLit
  const char* const* text_params = nullptr;
  const uint64_t* text_param_lens = nullptr;

  uint64_t* sizes = nullptr;   // SIZES out: per output column, byte size
  uint8_t** outputs = nullptr; // FETCH in: per output column, destination
  uint64_t* rows = nullptr;    // SIZES/FETCH out: result row count
  uint64_t* error = nullptr;   // out: 0 or encode_kernel_error(...)
  void** state = nullptr;      // kernel state slot, owned by the host
};

// Entry returns 0 on success, otherwise the same value stored in *error.
using KernelFn = int64_t (*)(RawqCall*);

// Per output column, FETCH writes [validity bitmap ceil(rows/8), LSB-first,
// set = present] followed by the data. INT32-typed columns transfer as int64
// (the engine's integer domain, so SUM and arithmetic never truncate); DATE
// int32, FLOAT64 double, BOOL u8, TEXT per value u32 length + bytes.

}  // namespace rawq::codegen
