// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>

#include "mcbf/linalg.hpp"

namespace mcbf {

/// Deterministic random stream. Gaussians are produced by an explicit
/// Box-Muller transform on top of mt19937_64 so that a given seed yields the
/// same draws on every platform (std::normal_distribution is
/// implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal.
  double gaussian();

  /// Circularly-symmetric complex normal with E|x|^2 = variance.
  Complex complex_gaussian(double variance);

  /// Uniform point on the unit sphere in C^n (used for ellipsoid sampling).
  CVec complex_unit_sphere(int n);

  /// Uniform point in the closed unit ball in C^n.
  CVec complex_unit_ball(int n);

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace mcbf
