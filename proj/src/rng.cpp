// SPDX-License-Identifier: Apache-2.0

#include "mcbf/rng.hpp"

#include <cmath>

namespace mcbf {

double Rng::gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

Complex Rng::complex_gaussian(double variance) {
  const double s = std::sqrt(variance / 2.0);
  return {s * gaussian(), s * gaussian()};
}

CVec Rng::complex_unit_sphere(int n) {
  CVec v(n);
  for (int i = 0; i < n; ++i) v(i) = complex_gaussian(1.0);
  const double norm = v.norm();
  if (norm < 1e-300) return complex_unit_sphere(n);
  return v / norm;
}

CVec Rng::complex_unit_ball(int n) {
  // Radius distributed as u^(1/(2n)) makes the point uniform in the ball.
  const double r = std::pow(uniform(), 1.0 / (2.0 * n));
  return complex_unit_sphere(n) * r;
}

}  // namespace mcbf
