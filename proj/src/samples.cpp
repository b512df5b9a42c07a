#include "quenchlab/samples.hpp"

#include <algorithm>

namespace quenchlab {

std::uint64_t SampleSet::key_of(const std::vector<std::int8_t>& row) {
  std::uint64_t key = 0;
  for (std::size_t v = 0; v < row.size(); ++v)
    if (row[v] < 0) key |= (1ULL << v);
  return key;
}

void SampleSet::compact() {
  if (n > 63) return;  // bitmask keying only
  std::map<std::uint64_t, std::int64_t> acc;
  std::map<std::uint64_t, std::vector<std::int8_t>> rep;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::uint64_t k = key_of(rows[r]);
    acc[k] += counts[r];
    rep.emplace(k, rows[r]);
  }
  rows.clear();
  counts.clear();
  for (const auto& [k, c] : acc) {
    rows.push_back(rep[k]);
    counts.push_back(c);
  }
}

CorrelationMatrix SampleSet::correlations() const {
  if (total() <= 0) throw ValidationError("sample set is empty");
  CorrelationMatrix c(n);
  const double norm = 1.0 / static_cast<double>(total());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t r = 0; r < rows.size(); ++r)
        acc += static_cast<double>(counts[r]) * rows[r][i] * rows[r][j];
      c.set_sym(i, j, acc * norm);
    }
  return c;
}

std::map<std::uint64_t, double> SampleSet::distribution() const {
  if (n > 63) throw ValidationError("distribution keying requires n <= 63");
  const double norm = 1.0 / static_cast<double>(total());
  std::map<std::uint64_t, double> p;
  for (std::size_t r = 0; r < rows.size(); ++r) p[key_of(rows[r])] += counts[r] * norm;
  return p;
}

}  // namespace quenchlab
