#pragma once

#include <vector>

#include "quenchlab/common.hpp"

namespace quenchlab {

/// Symmetric matrix of two-point functions c_ij = <sigma^z_i sigma^z_j>,
/// indexed by node id, diagonal fixed at 1.
struct CorrelationMatrix {
  int n = 0;
  std::vector<double> data;  // row-major n x n

  CorrelationMatrix() = default;
  explicit CorrelationMatrix(int n_) : n(n_), data(static_cast<std::size_t>(n_) * n_, 0.0) {
    for (int i = 0; i < n; ++i) at(i, i) = 1.0;
  }

  double& at(int i, int j) { return data[static_cast<std::size_t>(i) * n + j]; }
  double at(int i, int j) const { return data[static_cast<std::size_t>(i) * n + j]; }

  void set_sym(int i, int j, double v) {
    at(i, j) = v;
    at(j, i) = v;
  }
};

}  // namespace quenchlab
