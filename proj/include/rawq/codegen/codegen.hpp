#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rawq/codegen/pipeline.hpp"
#include "rawq/opt/plan.hpp"

namespace rawq::codegen {

// Knobs for query-specific specialization. Defaults give the fully
// specialized fused kernel.
struct SpecializationFlags {
  bool fusion = true;            // one loop per pipeline vs two-pass posmap
  bool elide_null_checks = true; // drop empty-field checks on non-null columns
  bool inline_constants = true;  // predicate literals baked into the source
  bool unroll_columns = true;    // straight-line per-column code vs type switch
  uint32_t batch_rows = 1;       // fused only: rows staged per gather/apply pass
};

// Literal operand values in kernel parameter order; only populated when
// inline_constants is off. Order matches the RawqCall param arrays.
struct KernelParams {
  std::vector<int64_t> ints;        // integer, date (days) literals
  std::vector<double> floats;       // float literals
  std::vector<std::string> texts;   // text literals
};

struct GeneratedSource {
  std::string source;        // complete self-contained translation unit
  std::string entry_symbol;  // "rawq_run_" + 16 hex digits of the signature
  uint64_t signature = 0;
  KernelParams params;
};

// Cache key over everything the emitted text depends on: generator version,
// per-table schema hashes, the join tree shape, normalized conjuncts
// (sorted by table, ordinal, operator, literal text), select items, and the
// flags. Equal signatures imply byte-identical generated source.
uint64_t signature(const opt::PhysicalPlan& plan, const Catalog& catalog,
                   const SpecializationFlags& flags);

// Emits the kernel for `plan`. Marker comments are a stable contract for
// structural tests:
//   /*ROWLOOP*/  on each loop that consumes the pipeline's input (text rows,
//                or positional-map rows in non-fused pass 2); fused kernels
//                have one per pipeline, non-fused have two.
//   /*COL:name*/ once per tokenized ordinal when unroll_columns is on.
//   /*TYCHK*/    on the runtime type dispatch, present iff unroll_columns
//                is off.
//   /*NULLCHK*/  on every emitted null check: empty-field checks (nullable
//                columns always; non-null non-TEXT columns only when
//                elide_null_checks is off; never TEXT) and evaluation-time
//                null guards on nullable operands.
GeneratedSource generate(const opt::PhysicalPlan& plan, const Catalog& catalog,
                         const SpecializationFlags& flags);

// Mode-specific entry points; each checks the fusion flag and delegates.
GeneratedSource gen_fused(const opt::PhysicalPlan& plan, const Catalog& catalog,
                          const SpecializationFlags& flags);
GeneratedSource gen_nonfused(const opt::PhysicalPlan& plan,
                             const Catalog& catalog,
                             const SpecializationFlags& flags);

}  // namespace rawq::codegen
