// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "mcbf/linalg.hpp"

namespace mcbf {

enum class ConeKind { NonNegative, SecondOrder, SemiDefinite };

struct ConeBlock {
  ConeKind kind;
  int dim;  // orthant length / SOC dimension / PSD matrix side
  int length() const { return kind == ConeKind::SemiDefinite ? svec_length(dim) : dim; }
};

/// Conic program in standard form:
///   minimize    c^T x
///   subject to  eq_lhs x = eq_rhs
///               cone_rhs - cone_lhs x in K
/// where K is the ordered product of the cone blocks (the single non-negative
/// orthant block first, then second-order cones, then PSD cones in svec form).
struct ConeProgram {
  RVec objective;
  RMat eq_lhs;
  RVec eq_rhs;
  RMat cone_lhs;
  RVec cone_rhs;
  std::vector<ConeBlock> cones;

  int num_vars() const { return static_cast<int>(objective.size()); }
  int num_eq() const { return static_cast<int>(eq_rhs.size()); }
  int cone_rows() const { return static_cast<int>(cone_rhs.size()); }
};

struct ConicSolution {
  enum class Status { Optimal, IterationLimit, NumericalFailure };
  Status status = Status::NumericalFailure;
  RVec x, s, z, y;
  double objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double duality_gap = 0.0;
  int iterations = 0;
  bool ok() const { return status == Status::Optimal; }
};

/// Solver abstraction. Implementations return a primal/dual point whose
/// residuals are within the reported tolerance when status is Optimal.
class ConicBackend {
 public:
  virtual ~ConicBackend() = default;
  virtual ConicSolution solve(const ConeProgram& program) const = 0;
  virtual double tolerance() const = 0;
};

class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// Affine expression helpers for assembling programs.
// ---------------------------------------------------------------------------

struct LinExpr {
  RVec coeffs;
  double offset = 0.0;

  LinExpr() = default;
  explicit LinExpr(int num_vars) : coeffs(RVec::Zero(num_vars)) {}
  LinExpr& operator+=(const LinExpr& o) {
    coeffs += o.coeffs;
    offset += o.offset;
    return *this;
  }
  LinExpr& operator-=(const LinExpr& o) {
    coeffs -= o.coeffs;
    offset -= o.offset;
    return *this;
  }
  LinExpr& operator*=(double a) {
    coeffs *= a;
    offset *= a;
    return *this;
  }
  friend LinExpr operator+(LinExpr l, const LinExpr& r) { return l += r; }
  friend LinExpr operator-(LinExpr l, const LinExpr& r) { return l -= r; }
  friend LinExpr operator*(double a, LinExpr e) { return e *= a; }
};

/// Complex-valued affine expression as a (real, imag) pair of LinExpr.
struct CLinExpr {
  LinExpr re, im;

  CLinExpr() = default;
  explicit CLinExpr(int num_vars) : re(num_vars), im(num_vars) {}
  CLinExpr conj() const {
    CLinExpr out = *this;
    out.im *= -1.0;
    return out;
  }
  CLinExpr& operator+=(const CLinExpr& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  friend CLinExpr operator+(CLinExpr l, const CLinExpr& r) { return l += r; }
  friend CLinExpr operator-(CLinExpr l, const CLinExpr& r) {
    l.re -= r.re;
    l.im -= r.im;
    return l;
  }
  friend CLinExpr operator*(Complex a, const CLinExpr& e) {
    CLinExpr out;
    out.re = a.real() * e.re - a.imag() * e.im;
    out.im = a.real() * e.im + a.imag() * e.re;
    return out;
  }
};

/// Accumulates constraints and emits a ConeProgram. Rows are regrouped at
/// build time so that the orthant block comes first.
class ConeProgramBuilder {
 public:
  explicit ConeProgramBuilder(int num_vars) : num_vars_(num_vars), objective_(num_vars) {}

  int num_vars() const { return num_vars_; }
  LinExpr variable(int index, double scale = 1.0) const;
  LinExpr constant(double value) const;

  void minimize(const LinExpr& expr) { objective_ = expr; }
  void add_equality(const LinExpr& expr);               // expr == 0
  void add_nonnegative(const LinExpr& expr);            // expr >= 0
  void add_second_order(const std::vector<LinExpr>& block);  // block[0] >= ||block[1:]||
  /// ||exprs||^2 <= bound, encoded as a second-order cone.
  void add_quadratic_bound(const std::vector<LinExpr>& exprs, const LinExpr& bound);
  /// Symmetric matrix of expressions (lower triangle read) must be PSD.
  void add_semidefinite(const std::vector<std::vector<LinExpr>>& matrix);
  /// Hermitian matrix of complex expressions must be PSD; added through the
  /// real [[Re, -Im], [Im, Re]] embedding.
  void add_hermitian_semidefinite(const std::vector<std::vector<CLinExpr>>& matrix);

  ConeProgram build() const;

 private:
  int num_vars_;
  LinExpr objective_;
  std::vector<LinExpr> equalities_;
  std::vector<LinExpr> nonneg_;
  std::vector<std::vector<LinExpr>> socs_;
  std::vector<std::vector<LinExpr>> psd_rows_;  // svec-ordered rows per PSD block
  std::vector<int> psd_dims_;
};

}  // namespace mcbf
