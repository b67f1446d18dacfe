#pragma once

// Dense-array reference computations used as independent oracles.

#include <cmath>
#include <cstddef>
#include <vector>

#include "amlc/rng.hpp"
#include "amlc/sparse_vector.hpp"

namespace amlc::testing {

inline double dense_dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Random dense vector with roughly `density` of coordinates nonzero.
inline std::vector<double> random_dense(Rng& rng, std::size_t dim, double density) {
  std::vector<double> v(dim, 0.0);
  for (auto& c : v) {
    if (rng.uniform() < density) c = rng.uniform() * 4.0 - 2.0;
  }
  return v;
}

inline bool canonical(const SparseVector& v) {
  auto e = v.entries();
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (e[i].value == 0.0) return false;
    if (i > 0 && e[i].index <= e[i - 1].index) return false;
  }
  return true;
}

}  // namespace amlc::testing
