#pragma once

#include <vector>

#include "rawq/opt/plan.hpp"

namespace rawq::codegen {

// One push-based pipeline: a raw-file scan streamed through zero or more
// hash-join probes into a breaker. Build pipelines end at the hash table of
// `sink_join`; the last pipeline ends at the query's aggregate or output.
struct Pipeline {
  int table_idx = -1;                            // scanned base table
  const opt::JoinTreeNode* leaf = nullptr;
  std::vector<const opt::JoinTreeNode*> probes;  // joins probed, in order
  bool is_final = false;
  const opt::JoinTreeNode* sink_join = nullptr;  // set iff !is_final
};

// Pipelines in execution order: every build pipeline precedes the pipeline
// that probes its hash table; the final pipeline is last. Every join closes
// exactly one build pipeline, so the count is (number of joins) + 1.
std::vector<Pipeline> split_pipelines(const opt::PhysicalPlan& plan);

}  // namespace rawq::codegen
