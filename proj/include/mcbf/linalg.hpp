// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <complex>

namespace mcbf {

using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using Complex = std::complex<double>;

/// Length of the packed lower-triangle (svec) representation of an n x n
/// symmetric matrix.
inline int svec_length(int n) { return n * (n + 1) / 2; }

/// Packs a symmetric matrix column-major, lower triangle, off-diagonal
/// entries scaled by sqrt(2) so that svec(A).dot(svec(B)) == trace(A*B).
RVec svec(const RMat& m);

/// Inverse of svec.
RMat smat(const RVec& v, int n);

/// Real embedding of a complex Hermitian matrix: [[Re, -Im], [Im, Re]].
/// The embedding is PSD iff the Hermitian argument is PSD.
RMat hermitian_embed(const CMat& h);

/// Smallest eigenvalue of a symmetric real matrix.
double min_eigenvalue(const RMat& m);

/// Smallest eigenvalue of a Hermitian complex matrix.
double min_eigenvalue(const CMat& m);

/// Rotates v by a unit phase so that pilot^H v becomes real non-negative.
CVec phase_align(const CVec& v, const CVec& pilot);

}  // namespace mcbf
