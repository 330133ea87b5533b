// SPDX-License-Identifier: Apache-2.0

#include "mcbf/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace mcbf {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
}

RVec svec(const RMat& m) {
  const int n = static_cast<int>(m.rows());
  RVec out(svec_length(n));
  int idx = 0;
  for (int j = 0; j < n; ++j) {
    out(idx++) = m(j, j);
    for (int i = j + 1; i < n; ++i) out(idx++) = kSqrt2 * m(i, j);
  }
  return out;
}

RMat smat(const RVec& v, int n) {
  if (v.size() != svec_length(n)) throw std::invalid_argument("smat: size mismatch");
  RMat out(n, n);
  int idx = 0;
  for (int j = 0; j < n; ++j) {
    out(j, j) = v(idx++);
    for (int i = j + 1; i < n; ++i) {
      const double x = v(idx++) / kSqrt2;
      out(i, j) = x;
      out(j, i) = x;
    }
  }
  return out;
}

RMat hermitian_embed(const CMat& h) {
  const int n = static_cast<int>(h.rows());
  RMat out(2 * n, 2 * n);
  const RMat re = h.real();
  const RMat im = h.imag();
  out.topLeftCorner(n, n) = re;
  out.bottomRightCorner(n, n) = re;
  out.topRightCorner(n, n) = -im;
  out.bottomLeftCorner(n, n) = im;
  return out;
}

double min_eigenvalue(const RMat& m) {
  Eigen::SelfAdjointEigenSolver<RMat> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double min_eigenvalue(const CMat& m) {
  Eigen::SelfAdjointEigenSolver<CMat> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

CVec phase_align(const CVec& v, const CVec& pilot) {
  const Complex inner = pilot.dot(v);  // pilot^H v
  const double mag = std::abs(inner);
  if (mag < 1e-300) return v;
  return v * (std::conj(inner) / mag);
}

}  // namespace mcbf
