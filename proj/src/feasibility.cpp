// SPDX-License-Identifier: Apache-2.0

#include "mcbf/feasibility.hpp"

#include <algorithm>
#include <cmath>

#include "mcbf/ipm.hpp"

namespace mcbf {

namespace detail {

double clamp_gamma(double gamma) { return std::clamp(gamma, 1e-9, 1.0); }

bool gamma_vacuous(double gamma, CsiMode mode) {
  // MSE <= 1 is achievable with r = 0 whatever the channel, so targets at 1
  // impose nothing. The SOC form additionally needs gamma < 1 to avoid the
  // sqrt(gamma/(1-gamma)) blow-up.
  return mode == CsiMode::PerfectCsi ? gamma >= 1.0 - 1e-9 : gamma >= 1.0 - 1e-12;
}

}  // namespace detail

namespace {

std::vector<int> support_indices(const RVec& mask) {
  std::vector<int> idx;
  for (int i = 0; i < mask.size(); ++i) {
    if (mask(i) > 0.5) idx.push_back(i);
  }
  return idx;
}

CVec compress(const CVec& v, const std::vector<int>& support) {
  CVec out(support.size());
  for (std::size_t i = 0; i < support.size(); ++i) out(i) = v(support[i]);
  return out;
}

CVec expand(const CVec& u, const std::vector<int>& support, int n) {
  CVec out = CVec::Zero(n);
  for (std::size_t i = 0; i < support.size(); ++i) out(support[i]) = u(i);
  return out;
}

/// Shared per-call geometry: supports, masked channels, and the coupling
/// coefficients a_{k,j} = S_j^T (C_k h_k) and P_{k,j} = B_k^H C_k S_j so that
/// h_k^H C_k D_j v_j = a_{k,j}^H u_j and B_k^H C_k D_j v_j = P_{k,j} u_j.
struct Workspace {
  const Scenario& scenario;
  const ChannelRealization& realization;
  SelectionMatrices selection;
  int num_users;
  int total_antennas;
  std::vector<std::vector<int>> supports;
  std::vector<CVec> masked_channels;             // C_k h_hat_k
  std::vector<std::vector<CVec>> coupling;       // a[k][j]
  std::vector<std::vector<CMat>> error_coupling; // P[k][j]

  Workspace(const Scenario& s, const ChannelRealization& r)
      : scenario(s), realization(r), selection(selection_matrices(s)), num_users(s.num_users),
        total_antennas(s.total_antennas()) {
    supports.resize(num_users);
    masked_channels.resize(num_users);
    coupling.assign(num_users, std::vector<CVec>(num_users));
    error_coupling.assign(num_users, std::vector<CMat>(num_users));
    for (int k = 0; k < num_users; ++k) {
      supports[k] = support_indices(selection.data_masks[k]);
      masked_channels[k] = selection.coord_masks[k].array() * r.estimates[k].array();
    }
    for (int k = 0; k < num_users; ++k) {
      const CMat masked_b =
          selection.coord_masks[k].asDiagonal() * r.uncertainty_shapes[k];  // C_k B_k (rows)
      for (int j = 0; j < num_users; ++j) {
        coupling[k][j] = compress(masked_channels[k], supports[j]);
        CMat p(total_antennas, supports[j].size());
        for (std::size_t c = 0; c < supports[j].size(); ++c) p.col(c) = masked_b.adjoint().col(supports[j][c]);
        error_coupling[k][j] = p;
      }
    }
  }

  bool has_uncertainty(int user) const { return realization.uncertainty_shapes[user].norm() > 0.0; }
};

/// Variable index bookkeeping for the feasibility programs.
struct VarMap {
  std::vector<int> u_offset;  // per user, start of [Re u; Im u]
  std::vector<int> u_dim;     // complex dimension per user
  std::vector<int> r_tilde;   // -1 when absent
  std::vector<int> lambda;
  int margin = -1;
  int total = 0;
};

CLinExpr inner_product_expr(const ConeProgramBuilder& b, const CVec& a, int offset, int dim) {
  // a^H u for complex u stored as [Re u; Im u] at the given offset.
  CLinExpr e(b.num_vars());
  for (int i = 0; i < dim; ++i) {
    e.re.coeffs(offset + i) += a(i).real();
    e.re.coeffs(offset + dim + i) += a(i).imag();
    e.im.coeffs(offset + dim + i) += a(i).real();
    e.im.coeffs(offset + i) -= a(i).imag();
  }
  return e;
}

CLinExpr row_times_u_expr(const ConeProgramBuilder& b, const CMat& m, int row, int offset, int dim) {
  // (M u)_row as a complex expression.
  CLinExpr e(b.num_vars());
  for (int i = 0; i < dim; ++i) {
    const Complex c = m(row, i);
    e.re.coeffs(offset + i) += c.real();
    e.re.coeffs(offset + dim + i) -= c.imag();
    e.im.coeffs(offset + i) += c.imag();
    e.im.coeffs(offset + dim + i) += c.real();
  }
  return e;
}

void add_power_constraints(ConeProgramBuilder& b, const Workspace& ws, const VarMap& vm,
                           bool with_margin) {
  for (const auto& pc : ws.scenario.power_constraints) {
    Eigen::SelfAdjointEigenSolver<CMat> es(pc.q_matrix);
    const RVec evals = es.eigenvalues();
    const double lmax = std::max(evals.maxCoeff(), 0.0);
    std::vector<LinExpr> rows;
    for (int e = 0; e < evals.size(); ++e) {
      if (evals(e) <= 1e-12 * std::max(1.0, lmax)) continue;
      const CVec dir = std::sqrt(evals(e)) * es.eigenvectors().col(e);
      for (int k = 0; k < ws.num_users; ++k) {
        if (vm.u_dim[k] == 0) continue;
        const CVec coeff = compress(dir, ws.supports[k]);  // dir^H S u
        if (coeff.norm() == 0.0) continue;
        const CLinExpr expr = inner_product_expr(b, coeff, vm.u_offset[k], vm.u_dim[k]);
        rows.push_back(expr.re);
        rows.push_back(expr.im);
      }
    }
    LinExpr bound = b.constant(pc.limit);
    if (with_margin) bound += b.variable(vm.margin);
    b.add_quadratic_bound(rows, bound);
  }
}

/// Hermitian expression matrix for A_k of the robust reformulation, with the
/// margin variable added on the diagonal when requested. Block order:
/// scalar / K_r users / noise / N error rows.
std::vector<std::vector<CLinExpr>> robust_lmi_exprs(ConeProgramBuilder& b, const Workspace& ws,
                                                    const VarMap& vm, int user, double gamma) {
  const int kr = ws.num_users;
  const int n = ws.total_antennas;
  const int m = n + kr + 2;
  const double sqrt_gamma = std::sqrt(detail::clamp_gamma(gamma));
  std::vector<std::vector<CLinExpr>> a(m, std::vector<CLinExpr>(m, CLinExpr(b.num_vars())));

  LinExpr diag = b.variable(vm.r_tilde[user], sqrt_gamma);
  if (vm.margin >= 0) diag += b.variable(vm.margin);
  a[0][0].re = diag - b.variable(vm.lambda[user]);
  for (int j = 0; j < kr; ++j) a[1 + j][1 + j].re = diag;
  a[kr + 1][kr + 1].re = diag;
  LinExpr tail = b.variable(vm.lambda[user]);
  if (vm.margin >= 0) tail += b.variable(vm.margin);
  for (int i = 0; i < n; ++i) a[kr + 2 + i][kr + 2 + i].re = tail;

  a[kr + 1][0].re = b.constant(std::sqrt(ws.scenario.noise_variances(user)));

  for (int j = 0; j < kr; ++j) {
    // (V^H C^H h - r_tilde e_k)_j
    CLinExpr e(b.num_vars());
    if (vm.u_dim[j] > 0) {
      e = inner_product_expr(b, ws.coupling[user][j], vm.u_offset[j], vm.u_dim[j]).conj();
    }
    if (j == user) e.re -= b.variable(vm.r_tilde[user]);
    a[1 + j][0] = e;
    // -B_k^H C_k V column j
    if (vm.u_dim[j] > 0) {
      const CMat& p = ws.error_coupling[user][j];
      for (int i = 0; i < n; ++i) {
        if (p.row(i).norm() == 0.0) continue;
        CLinExpr r = row_times_u_expr(b, p, i, vm.u_offset[j], vm.u_dim[j]);
        r.re *= -1.0;
        r.im *= -1.0;
        a[kr + 2 + i][1 + j] = r;
      }
    }
  }
  return a;
}

ConicSolution solve_or_throw(const ConicBackend& backend, const ConeProgram& prog,
                             const char* what) {
  ConicSolution sol = backend.solve(prog);
  if (!sol.ok()) {
    // Accept near-converged iterates whose residuals are still meaningful.
    if (!(sol.x.size() > 0 && sol.primal_residual < 1e-6 && sol.dual_residual < 1e-6 &&
          std::abs(sol.duality_gap) < 1e-5)) {
      throw SolverError(std::string(what) + ": backend failed to converge");
    }
  }
  return sol;
}

}  // namespace

Strategy::Strategy(std::vector<CVec> v, RVec r, const SelectionMatrices& selection)
    : beamformers(std::move(v)), equalizers(std::move(r)) {
  for (std::size_t k = 0; k < beamformers.size(); ++k) {
    beamformers[k] = selection.data_masks[k].array() * beamformers[k].array();
  }
  if ((equalizers.array() < 0.0).any()) throw std::invalid_argument("Strategy: equalizers must be >= 0");
}

double Strategy::power_violation(const Scenario& scenario) const {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& pc : scenario.power_constraints) {
    double used = 0.0;
    for (const auto& v : beamformers) used += std::real(v.dot(pc.q_matrix * v));
    worst = std::max(worst, (used - pc.limit) / std::max(1.0, pc.limit));
  }
  return worst;
}

double mse_nominal(const ChannelRealization& realization, const SelectionMatrices& selection,
                   const Strategy& strategy, int user, const CVec& exact_channel,
                   const Scenario& scenario) {
  (void)realization;
  const int kr = static_cast<int>(strategy.beamformers.size());
  const double r = strategy.equalizers(user);
  const CVec ch = selection.coord_masks[user].array() * exact_channel.array();
  double mse = r * r * scenario.noise_variances(user);
  for (int j = 0; j < kr; ++j) {
    const CVec dv = selection.data_masks[j].array() * strategy.beamformers[j].array();
    const Complex gain = r * ch.dot(dv);  // r h^H C D_j v_j
    if (j == user) {
      mse += std::norm(gain - Complex(1.0, 0.0));
    } else {
      mse += std::norm(gain);
    }
  }
  return mse;
}

double optimal_equalizer_perfect_csi(const ChannelRealization& realization,
                                     const SelectionMatrices& selection,
                                     const std::vector<CVec>& beamformers, int user,
                                     const Scenario& scenario) {
  const CVec ch = selection.coord_masks[user].array() * realization.estimates[user].array();
  double denom = scenario.noise_variances(user);
  for (std::size_t j = 0; j < beamformers.size(); ++j) {
    const CVec dv = selection.data_masks[j].array() * beamformers[j].array();
    denom += std::norm(ch.dot(dv));
  }
  const CVec dvk = selection.data_masks[user].array() * beamformers[user].array();
  return std::abs(ch.dot(dvk)) / denom;
}

double equalizer_for_target_mse(double signal_gain, double total_power, double gamma) {
  const double disc = signal_gain * signal_gain - (1.0 - gamma) * total_power;
  if (disc < 0.0) {
    throw UnreachableTarget("equalizer_for_target_mse: target below the achievable MMSE");
  }
  return (signal_gain + std::sqrt(disc)) / total_power;
}

CMat build_robust_lmi(const ChannelRealization& realization, const SelectionMatrices& selection,
                      const CMat& stacked_beamformers, double r_tilde, double lambda, double gamma,
                      int user, const Scenario& scenario) {
  const int n = static_cast<int>(stacked_beamformers.rows());
  const int kr = static_cast<int>(stacked_beamformers.cols());
  if (selection.coord_masks[user].size() != n) throw std::invalid_argument("build_robust_lmi: dimension mismatch");
  const int m = n + kr + 2;
  const double sg = std::sqrt(gamma);
  const CVec ch = selection.coord_masks[user].array() * realization.estimates[user].array();
  const Eigen::RowVectorXcd signal_row = ch.adjoint() * stacked_beamformers;  // h^H C V
  const CMat cb = selection.coord_masks[user].asDiagonal() * realization.uncertainty_shapes[user];
  const CMat error_block = cb.adjoint() * stacked_beamformers;  // B^H C V

  CMat a = CMat::Zero(m, m);
  a(0, 0) = sg * r_tilde - lambda;
  for (int j = 0; j < kr; ++j) {
    a(0, 1 + j) = signal_row(j) - (j == user ? r_tilde : 0.0);
    a(1 + j, 0) = std::conj(a(0, 1 + j));
    a(1 + j, 1 + j) = sg * r_tilde;
  }
  a(0, kr + 1) = std::sqrt(scenario.noise_variances(user));
  a(kr + 1, 0) = a(0, kr + 1);
  a(kr + 1, kr + 1) = sg * r_tilde;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < kr; ++j) {
      a(kr + 2 + i, 1 + j) = -error_block(i, j);
      a(1 + j, kr + 2 + i) = std::conj(a(kr + 2 + i, 1 + j));
    }
    a(kr + 2 + i, kr + 2 + i) = lambda;
  }
  return a;
}

FeasibilityOutcome check_feasible(const Scenario& scenario, const ChannelRealization& realization,
                                  const RVec& gamma, const ConicBackend& backend) {
  if (gamma.size() != scenario.num_users) throw std::invalid_argument("check_feasible: gamma size");
  for (int k = 0; k < gamma.size(); ++k) {
    if (!(gamma(k) > 0.0) || gamma(k) > 1.0 + 1e-12) {
      throw std::invalid_argument("check_feasible: gamma must lie in (0, 1]");
    }
  }
  const Workspace ws(scenario, realization);
  const bool worst_case = scenario.csi_mode == CsiMode::WorstCase;

  std::vector<bool> vacuous(ws.num_users);
  for (int k = 0; k < ws.num_users; ++k) {
    vacuous[k] = detail::gamma_vacuous(detail::clamp_gamma(gamma(k)), scenario.csi_mode);
  }

  // Variable layout: per-user beamformers, then (worst case) r_tilde and
  // lambda for the active users, then the slack margin.
  VarMap vm;
  vm.u_offset.resize(ws.num_users);
  vm.u_dim.resize(ws.num_users);
  vm.r_tilde.assign(ws.num_users, -1);
  vm.lambda.assign(ws.num_users, -1);
  int next = 0;
  for (int k = 0; k < ws.num_users; ++k) {
    vm.u_offset[k] = next;
    vm.u_dim[k] = static_cast<int>(ws.supports[k].size());
    next += 2 * vm.u_dim[k];
  }
  if (worst_case) {
    for (int k = 0; k < ws.num_users; ++k) {
      if (vacuous[k]) continue;
      vm.r_tilde[k] = next++;
      vm.lambda[k] = next++;
    }
  }
  vm.margin = next++;
  vm.total = next;

  ConeProgramBuilder b(vm.total);
  b.minimize(b.variable(vm.margin));
  if (worst_case) {
    for (int k = 0; k < ws.num_users; ++k) {
      if (vacuous[k]) continue;
      b.add_nonnegative(b.variable(vm.r_tilde[k]));
      b.add_nonnegative(b.variable(vm.lambda[k]));
    }
  }
  add_power_constraints(b, ws, vm, /*with_margin=*/true);

  if (worst_case) {
    for (int k = 0; k < ws.num_users; ++k) {
      if (vacuous[k]) continue;
      b.add_hermitian_semidefinite(robust_lmi_exprs(b, ws, vm, k, gamma(k)));
    }
  } else {
    for (int k = 0; k < ws.num_users; ++k) {
      if (vacuous[k]) continue;
      const double g = detail::clamp_gamma(gamma(k));
      const double coef = std::sqrt(g / (1.0 - g));
      std::vector<LinExpr> soc;
      CLinExpr own = inner_product_expr(b, ws.coupling[k][k], vm.u_offset[k], vm.u_dim[k]);
      LinExpr head = coef * own.re;
      head += b.variable(vm.margin);
      soc.push_back(head);
      soc.push_back(b.constant(std::sqrt(scenario.noise_variances(k))));
      // Interference-plus-noise only: the own-signal term belongs on the
      // left with this coefficient (MSE <= gamma iff
      // sqrt(gamma/(1-gamma)) * signal >= sqrt(interference + noise)).
      for (int j = 0; j < ws.num_users; ++j) {
        if (j == k || vm.u_dim[j] == 0) continue;
        const CLinExpr e = inner_product_expr(b, ws.coupling[k][j], vm.u_offset[j], vm.u_dim[j]);
        soc.push_back(e.re);
        soc.push_back(e.im);
      }
      b.add_second_order(soc);
    }
  }

  const ConicSolution sol = solve_or_throw(backend, b.build(), "check_feasible");
  const double margin = -sol.objective;

  FeasibilityOutcome out;
  out.margin = margin;
  if (margin < 0.0) {
    out.feasible = false;
    out.note = "infeasible with slack " + std::to_string(-margin);
    return out;
  }

  std::vector<CVec> beamformers(ws.num_users);
  RVec equalizers = RVec::Zero(ws.num_users);
  RVec lambdas = RVec::Zero(ws.num_users);
  for (int k = 0; k < ws.num_users; ++k) {
    CVec u(vm.u_dim[k]);
    for (int i = 0; i < vm.u_dim[k]; ++i) {
      u(i) = Complex(sol.x(vm.u_offset[k] + i), sol.x(vm.u_offset[k] + vm.u_dim[k] + i));
    }
    beamformers[k] = expand(u, ws.supports[k], ws.total_antennas);
  }
  if (worst_case) {
    for (int k = 0; k < ws.num_users; ++k) {
      if (vacuous[k]) continue;
      const double rt = sol.x(vm.r_tilde[k]);
      equalizers(k) = rt > 1e-12 ? 1.0 / rt : 0.0;
      lambdas(k) = std::max(0.0, sol.x(vm.lambda[k]));
    }
  } else {
    // Align phases so the nominal signal gains are real non-negative, then
    // apply the MMSE equalizers.
    for (int k = 0; k < ws.num_users; ++k) {
      beamformers[k] = phase_align(beamformers[k], ws.masked_channels[k]);
    }
    for (int k = 0; k < ws.num_users; ++k) {
      equalizers(k) =
          vacuous[k] && beamformers[k].norm() == 0.0
              ? 0.0
              : optimal_equalizer_perfect_csi(realization, ws.selection, beamformers, k, scenario);
    }
  }
  Strategy strategy(std::move(beamformers), std::move(equalizers), ws.selection);

  // A-posteriori certificate check at the backend tolerance.
  const double tol = backend.tolerance();
  if (strategy.power_violation(scenario) > tol) {
    throw SolverError("check_feasible: certificate violates the power constraints");
  }
  for (int k = 0; k < ws.num_users; ++k) {
    if (vacuous[k]) continue;
    if (worst_case) {
      CMat stacked(ws.total_antennas, ws.num_users);
      for (int j = 0; j < ws.num_users; ++j) {
        stacked.col(j) = ws.selection.data_masks[j].array() * strategy.beamformers[j].array();
      }
      const double rt = sol.x(vm.r_tilde[k]);
      const CMat ak = build_robust_lmi(realization, ws.selection, stacked, rt, lambdas(k),
                                       detail::clamp_gamma(gamma(k)), k, scenario);
      const double scale = std::max(1.0, ak.cwiseAbs().maxCoeff());
      if (min_eigenvalue(ak) < -tol * scale) {
        throw SolverError("check_feasible: certificate violates the robust MSE constraint");
      }
    } else {
      const double mse =
          mse_nominal(realization, ws.selection, strategy, k, realization.estimates[k], scenario);
      if (mse > gamma(k) + tol) {
        throw SolverError("check_feasible: certificate violates the nominal MSE target");
      }
    }
  }

  out.feasible = true;
  out.strategy = std::move(strategy);
  out.lambdas = std::move(lambdas);
  out.note = "feasible with slack " + std::to_string(margin);
  return out;
}

double worst_case_mse(const Scenario& scenario, const ChannelRealization& realization,
                      const Strategy& strategy, int user, const ConicBackend& backend) {
  const double r = strategy.equalizers(user);
  if (r <= 0.0) return 1.0;
  const double r_tilde = 1.0 / r;
  const Workspace ws(scenario, realization);
  const int n = ws.total_antennas;
  const int kr = ws.num_users;
  CMat stacked(n, kr);
  for (int j = 0; j < kr; ++j) {
    stacked.col(j) = ws.selection.data_masks[j].array() * strategy.beamformers[j].array();
  }

  // min gamma_tilde subject to A_k(gamma_tilde, lambda) PSD; gamma = tilde^2.
  ConeProgramBuilder b(2);
  const int v_gamma = 0, v_lambda = 1;
  b.minimize(b.variable(v_gamma));
  b.add_nonnegative(b.variable(v_gamma));
  b.add_nonnegative(b.variable(v_lambda));

  const CVec ch = ws.masked_channels[user];
  const Eigen::RowVectorXcd signal_row = ch.adjoint() * stacked;
  const CMat cb = ws.selection.coord_masks[user].asDiagonal() * realization.uncertainty_shapes[user];
  const CMat error_block = cb.adjoint() * stacked;

  const int m = n + kr + 2;
  std::vector<std::vector<CLinExpr>> a(m, std::vector<CLinExpr>(m, CLinExpr(2)));
  a[0][0].re = b.variable(v_gamma, r_tilde) - b.variable(v_lambda);
  for (int j = 0; j < kr; ++j) {
    a[1 + j][1 + j].re = b.variable(v_gamma, r_tilde);
    const Complex c = std::conj(signal_row(j)) - (j == user ? Complex(r_tilde, 0.0) : Complex(0.0, 0.0));
    a[1 + j][0].re = b.constant(c.real());
    a[1 + j][0].im = b.constant(c.imag());
    for (int i = 0; i < n; ++i) {
      a[kr + 2 + i][1 + j].re = b.constant(-error_block(i, j).real());
      a[kr + 2 + i][1 + j].im = b.constant(-error_block(i, j).imag());
    }
  }
  a[kr + 1][0].re = b.constant(std::sqrt(scenario.noise_variances(user)));
  a[kr + 1][kr + 1].re = b.variable(v_gamma, r_tilde);
  for (int i = 0; i < n; ++i) a[kr + 2 + i][kr + 2 + i].re = b.variable(v_lambda);
  b.add_hermitian_semidefinite(a);

  const ConicSolution sol = solve_or_throw(backend, b.build(), "worst_case_mse");
  const double gamma_tilde = std::max(0.0, sol.x(v_gamma));
  return gamma_tilde * gamma_tilde;
}

}  // namespace mcbf
