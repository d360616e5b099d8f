#pragma once

#include "drot/core.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace drot {

/// Seeded generator for experiment instances. Every draw is derived directly
/// from the standardized mt19937_64 bit stream (53-bit shift for uniforms),
/// so sequences replicate across platforms and standard libraries.
class Rng {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64/shift53";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform index in [0, n).
  Index index(Index n) {
    const Index k = static_cast<Index>(uniform() * static_cast<double>(n));
    return k >= n ? n - 1 : k;
  }

  /// Uniform sample from the probability simplex (normalized exponentials).
  Vector simplex(Index n) {
    Vector w(n);
    for (Index i = 0; i < n; ++i) {
      w[i] = -std::log(1.0 - uniform());
    }
    return w / w.sum();
  }

  Matrix uniform_matrix(Index rows, Index cols, double lo, double hi) {
    Matrix out(rows, cols);
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < cols; ++j) {
        out(i, j) = uniform(lo, hi);
      }
    }
    return out;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace drot
