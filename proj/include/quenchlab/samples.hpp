#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "quenchlab/common.hpp"
#include "quenchlab/correlations.hpp"

namespace quenchlab {

/// +-1 spin configurations with multiplicities, indexed by node id.
struct SampleSet {
  int n = 0;
  std::vector<std::vector<std::int8_t>> rows;
  std::vector<std::int64_t> counts;
  std::string source;  // engine tag + seed, provenance only

  std::int64_t total() const {
    std::int64_t k = 0;
    for (auto c : counts) k += c;
    return k;
  }

  void add(const std::vector<std::int8_t>& row, std::int64_t count = 1) {
    rows.push_back(row);
    counts.push_back(count);
  }

  /// Merges duplicate configurations.
  void compact();

  /// Empirical two-point correlations (diagonal 1).
  CorrelationMatrix correlations() const;

  /// Empirical distribution keyed by bitmask (bit v set when spin v is -1).
  /// Requires n <= 63.
  std::map<std::uint64_t, double> distribution() const;

  static std::uint64_t key_of(const std::vector<std::int8_t>& row);
};

}  // namespace quenchlab
