#pragma once

#include <algorithm>
#include <cstdint>
#include <unordered_set>
#include <vector>

#include "rawq/hash.hpp"

namespace rawq {

// Distinct-value counter over 64-bit value hashes. Counts exactly while the
// number of distinct hashes stays below kExactLimit, then degrades to a
// k-minimum-values estimator (k = 16384, ~0.8% typical error).
class DistinctSketch {
 public:
  static constexpr size_t kExactLimit = 100000;
  static constexpr size_t kMinValues = 16384;

  void add_hash(uint64_t h) {
    if (exact_) {
      seen_.insert(h);
      if (seen_.size() > kExactLimit) demote();
      return;
    }
    if (h >= threshold_ || !member_.insert(h).second) return;
    std::pop_heap(kmv_.begin(), kmv_.end());
    member_.erase(kmv_.back());
    kmv_.back() = h;
    std::push_heap(kmv_.begin(), kmv_.end());
    threshold_ = kmv_.front();
  }

  void add_bytes(const void* data, size_t len) {
    add_hash(mix64(fnv1a64(data, len)));
  }

  uint64_t estimate() const {
    if (exact_) return seen_.size();
    // (k-1) * 2^64 / kth smallest hash
    long double kth = static_cast<long double>(kmv_.front());
    long double full = 18446744073709551616.0L;  // 2^64
    return static_cast<uint64_t>((kmv_.size() - 1) * (full / kth));
  }

  // Merges another sketch; used to combine per-chunk statistics.
  void merge(const DistinctSketch& other) {
    if (other.exact_) {
      for (uint64_t h : other.seen_) add_hash(h);
    } else {
      if (exact_) demote();
      for (uint64_t h : other.kmv_) add_hash(h);
    }
  }

 private:
  // Switch from the exact set to the k smallest hashes seen so far. Only
  // called once the set holds more than kExactLimit entries, so the KMV
  // buffer always starts full.
  void demote() {
    std::vector<uint64_t> all(seen_.begin(), seen_.end());
    std::nth_element(all.begin(), all.begin() + kMinValues - 1, all.end());
    all.resize(kMinValues);
    kmv_ = std::move(all);
    std::make_heap(kmv_.begin(), kmv_.end());
    member_ = std::unordered_set<uint64_t>(kmv_.begin(), kmv_.end());
    threshold_ = kmv_.front();
    exact_ = false;
    seen_.clear();
  }

  bool exact_ = true;
  std::unordered_set<uint64_t> seen_;
  std::vector<uint64_t> kmv_;  // max-heap of the k smallest hashes
  std::unordered_set<uint64_t> member_;
  uint64_t threshold_ = UINT64_MAX;
};

}  // namespace rawq
