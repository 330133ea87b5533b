// SPDX-License-Identifier: Apache-2.0

#include "mcbf/conic.hpp"

#include <cmath>

namespace mcbf {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
}

LinExpr ConeProgramBuilder::variable(int index, double scale) const {
  LinExpr e(num_vars_);
  e.coeffs(index) = scale;
  return e;
}

LinExpr ConeProgramBuilder::constant(double value) const {
  LinExpr e(num_vars_);
  e.offset = value;
  return e;
}

void ConeProgramBuilder::add_equality(const LinExpr& expr) { equalities_.push_back(expr); }

void ConeProgramBuilder::add_nonnegative(const LinExpr& expr) { nonneg_.push_back(expr); }

void ConeProgramBuilder::add_second_order(const std::vector<LinExpr>& block) {
  if (block.size() < 2) throw std::invalid_argument("add_second_order: block too small");
  socs_.push_back(block);
}

void ConeProgramBuilder::add_quadratic_bound(const std::vector<LinExpr>& exprs, const LinExpr& bound) {
  // ||x||^2 <= w  <=>  ||((w-1)/2, x)|| <= (w+1)/2
  std::vector<LinExpr> block;
  block.reserve(exprs.size() + 2);
  LinExpr head = bound;
  head *= 0.5;
  LinExpr tail = head;
  head.offset += 0.5;
  tail.offset -= 0.5;
  block.push_back(head);
  block.push_back(tail);
  for (const auto& e : exprs) block.push_back(e);
  socs_.push_back(std::move(block));
}

void ConeProgramBuilder::add_semidefinite(const std::vector<std::vector<LinExpr>>& matrix) {
  const int n = static_cast<int>(matrix.size());
  std::vector<LinExpr> rows;
  rows.reserve(svec_length(n));
  for (int j = 0; j < n; ++j) {
    rows.push_back(matrix[j][j]);
    for (int i = j + 1; i < n; ++i) {
      LinExpr e = matrix[i][j];
      e *= kSqrt2;
      rows.push_back(e);
    }
  }
  psd_rows_.push_back(std::move(rows));
  psd_dims_.push_back(n);
}

void ConeProgramBuilder::add_hermitian_semidefinite(const std::vector<std::vector<CLinExpr>>& matrix) {
  const int n = static_cast<int>(matrix.size());
  // Embedding [[P, -Q], [Q, P]] with P = Re (symmetric), Q = Im
  // (antisymmetric). Only the lower triangle of the given Hermitian matrix is
  // read.
  std::vector<std::vector<LinExpr>> embed(2 * n, std::vector<LinExpr>(2 * n, LinExpr(num_vars_)));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      const LinExpr& re = matrix[i][j].re;
      const LinExpr& im = matrix[i][j].im;
      embed[i][j] = re;
      embed[j][i] = re;
      embed[n + i][n + j] = re;
      embed[n + j][n + i] = re;
      // Q(i,j) = im, Q(j,i) = -im; bottom-left block carries Q.
      embed[n + i][j] = im;
      LinExpr neg = im;
      neg *= -1.0;
      embed[n + j][i] = neg;
      embed[i][n + j] = neg;  // top-right block is -Q
      embed[j][n + i] = im;
    }
  }
  add_semidefinite(embed);
}

ConeProgram ConeProgramBuilder::build() const {
  ConeProgram p;
  p.objective = objective_.coeffs;

  const int num_eq = static_cast<int>(equalities_.size());
  p.eq_lhs.resize(num_eq, num_vars_);
  p.eq_rhs.resize(num_eq);
  for (int i = 0; i < num_eq; ++i) {
    p.eq_lhs.row(i) = equalities_[i].coeffs.transpose();
    p.eq_rhs(i) = -equalities_[i].offset;
  }

  int rows = static_cast<int>(nonneg_.size());
  for (const auto& b : socs_) rows += static_cast<int>(b.size());
  for (const auto& b : psd_rows_) rows += static_cast<int>(b.size());
  p.cone_lhs.resize(rows, num_vars_);
  p.cone_rhs.resize(rows);

  // s = h - Gx must reproduce the expression value: G row = -coeffs, h = offset.
  int r = 0;
  auto put = [&](const LinExpr& e) {
    p.cone_lhs.row(r) = -e.coeffs.transpose();
    p.cone_rhs(r) = e.offset;
    ++r;
  };
  if (!nonneg_.empty()) {
    for (const auto& e : nonneg_) put(e);
    p.cones.push_back({ConeKind::NonNegative, static_cast<int>(nonneg_.size())});
  }
  for (const auto& block : socs_) {
    for (const auto& e : block) put(e);
    p.cones.push_back({ConeKind::SecondOrder, static_cast<int>(block.size())});
  }
  for (std::size_t b = 0; b < psd_rows_.size(); ++b) {
    for (const auto& e : psd_rows_[b]) put(e);
    p.cones.push_back({ConeKind::SemiDefinite, psd_dims_[b]});
  }
  return p;
}

}  // namespace mcbf
