#pragma once

#include <functional>
#include <map>

#include "rawq/exec/result_set.hpp"
#include "rawq/opt/plan.hpp"
#include "rawq/storage/stored_table.hpp"

namespace rawq::exec {

using Tuple = std::vector<Value>;
using RowSink = std::function<void(const Tuple&)>;

struct ExecOptions {
  // Loaded binary tables, keyed by table index; scans use them instead of
  // re-parsing the raw file. Only full-schema tables may be registered.
  std::map<int, const storage::StoredTable*> stored;
};

// Generic tuple-at-a-time engine with per-field runtime type dispatch. The
// deliberate branches and boxing make it the baseline generated code is
// measured against, and the oracle it is checked against.
ResultSet run_generic(const opt::PhysicalPlan& plan, const Catalog& catalog,
                      const ExecOptions& opts = {});

// Streaming variant; rows are not materialized.
void run_generic(const opt::PhysicalPlan& plan, const Catalog& catalog,
                 const RowSink& sink, const ExecOptions& opts = {});

}  // namespace rawq::exec
