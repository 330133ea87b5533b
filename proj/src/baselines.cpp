// SPDX-License-Identifier: Apache-2.0

#include "mcbf/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace mcbf {

namespace {

constexpr double kRankOneRatio = 1e-7;

struct ZfGeometry {
  SelectionMatrices selection;
  std::vector<CVec> masked_channels;  // C_k h_hat_k
  std::vector<CMat> bases;            // E_k: N x d_k, orthonormal columns
  bool feasible = true;
  std::string note;
};

CMat support_columns(const RVec& mask) {
  const int n = static_cast<int>(mask.size());
  int d = 0;
  for (int i = 0; i < n; ++i) d += mask(i) > 0.5 ? 1 : 0;
  CMat s = CMat::Zero(n, d);
  int c = 0;
  for (int i = 0; i < n; ++i) {
    if (mask(i) > 0.5) s(i, c++) = 1.0;
  }
  return s;
}

/// Beamforming subspace of user k: the serving-antenna support, intersected
/// with the orthogonal complement of every zero-cap receiver's channel.
ZfGeometry zf_geometry(const Scenario& scenario, const ChannelRealization& realization,
                       const RVec& caps) {
  ZfGeometry g;
  g.selection = selection_matrices(scenario);
  const int kr = scenario.num_users;
  g.masked_channels.resize(kr);
  for (int k = 0; k < kr; ++k) {
    g.masked_channels[k] = g.selection.coord_masks[k].array() * realization.estimates[k].array();
  }
  g.bases.resize(kr);
  for (int k = 0; k < kr; ++k) {
    const CMat s = support_columns(g.selection.data_masks[k]);
    const int d = static_cast<int>(s.cols());
    std::vector<CVec> nulled;
    for (int r = 0; r < kr; ++r) {
      if (r == k || caps(r) > 0.0) continue;
      const CVec a = s.adjoint() * g.masked_channels[r];
      if (a.norm() > 1e-12) nulled.push_back(a);
    }
    if (nulled.empty()) {
      g.bases[k] = s;
      continue;
    }
    CMat a(d, nulled.size());
    for (std::size_t c = 0; c < nulled.size(); ++c) a.col(c) = nulled[c];
    Eigen::JacobiSVD<CMat> svd(a, Eigen::ComputeFullU);
    const int rank = static_cast<int>(svd.rank());
    const int dim = d - rank;
    if (dim <= 0) {
      g.feasible = false;
      g.note = "user " + std::to_string(k) + " has no spatial degrees of freedom left";
      return g;
    }
    g.bases[k] = s * svd.matrixU().rightCols(dim);
  }
  return g;
}

/// Hermitian matrix variable bookkeeping: diagonal entries first, then
/// (re, im) pairs for the strict lower triangle.
struct HermVar {
  int offset = 0;
  int dim = 0;
  int count() const { return dim * dim; }

  CLinExpr entry(const ConeProgramBuilder& b, int i, int j) const {
    CLinExpr e(b.num_vars());
    if (i == j) {
      e.re = b.variable(offset + i);
      return e;
    }
    const bool lower = i > j;
    const int r = lower ? i : j, c = lower ? j : i;
    int idx = 0;
    // pairs ordered column-major over the strict lower triangle
    for (int cc = 0; cc < c; ++cc) idx += dim - 1 - cc;
    idx += r - c - 1;
    e.re = b.variable(offset + dim + 2 * idx);
    e.im = b.variable(offset + dim + 2 * idx + 1, lower ? 1.0 : -1.0);
    return e;
  }

  /// Real affine expression tr(W M) for a Hermitian constant M.
  LinExpr trace_against(const ConeProgramBuilder& b, const CMat& m) const {
    LinExpr e(b.num_vars());
    for (int i = 0; i < dim; ++i) e += b.variable(offset + i, m(i, i).real());
    int idx = 0;
    for (int c = 0; c < dim; ++c) {
      for (int r = c + 1; r < dim; ++r, ++idx) {
        // 2 Re(W_rc * M_cr)
        e += b.variable(offset + dim + 2 * idx, 2.0 * m(c, r).real());
        e -= b.variable(offset + dim + 2 * idx + 1, 2.0 * m(c, r).imag());
      }
    }
    return e;
  }

  CMat value(const RVec& x) const {
    CMat w(dim, dim);
    for (int i = 0; i < dim; ++i) w(i, i) = x(offset + i);
    int idx = 0;
    for (int c = 0; c < dim; ++c) {
      for (int r = c + 1; r < dim; ++r, ++idx) {
        const Complex v(x(offset + dim + 2 * idx), x(offset + dim + 2 * idx + 1));
        w(r, c) = v;
        w(c, r) = std::conj(v);
      }
    }
    return w;
  }
};

/// Composed concave objective F(eta) = f(g(1/(1+eta))) with supergradient.
struct ComposedObjective {
  SystemUtility f;
  UserUtility g;

  double user_value(double eta) const {
    switch (g.kind) {
      case UserUtilityKind::InverseMse:
        return eta;
      case UserUtilityKind::Rate:
        return std::log2(1.0 + eta);
      case UserUtilityKind::NegMse:
        return eta / (1.0 + eta);
    }
    throw std::logic_error("unreachable");
  }
  double user_slope(double eta) const {
    switch (g.kind) {
      case UserUtilityKind::InverseMse:
        return 1.0;
      case UserUtilityKind::Rate:
        return 1.0 / ((1.0 + eta) * std::log(2.0));
      case UserUtilityKind::NegMse:
        return 1.0 / ((1.0 + eta) * (1.0 + eta));
    }
    throw std::logic_error("unreachable");
  }

  double value(const RVec& eta) const {
    RVec gv(eta.size());
    for (int k = 0; k < eta.size(); ++k) gv(k) = user_value(std::max(0.0, eta(k)));
    return f.eval(gv);
  }

  RVec supergradient(const RVec& eta) const {
    const int n = static_cast<int>(eta.size());
    const RVec w = f.effective_weights(n);
    RVec gv(n);
    for (int k = 0; k < n; ++k) gv(k) = user_value(eta(k));
    RVec df(n);
    switch (f.kind) {
      case SystemUtilityKind::WeightedSum:
        df = w;
        break;
      case SystemUtilityKind::MaxMin: {
        df.setZero();
        int arg = 0;
        (w.array() * gv.array()).minCoeff(&arg);
        df(arg) = w(arg);
        break;
      }
      case SystemUtilityKind::ProportionalFairness: {
        const double fv = f.eval(gv);
        const double wsum = w.sum();
        for (int k = 0; k < n; ++k) df(k) = fv * w(k) / (wsum * gv(k));
        break;
      }
      case SystemUtilityKind::HarmonicMean: {
        const double fv = f.eval(gv);
        const double wsum = w.sum();
        for (int k = 0; k < n; ++k) df(k) = fv * fv * w(k) / (wsum * gv(k) * gv(k));
        break;
      }
    }
    RVec out(n);
    for (int k = 0; k < n; ++k) out(k) = df(k) * user_slope(eta(k));
    return out;
  }
};

struct Cut {
  double offset;
  RVec slope;  // t <= offset + slope . eta
};

}  // namespace

RVec auto_interference_caps(const Scenario& scenario) {
  const int kr = scenario.num_users;
  RVec caps(kr);
  const int n = scenario.total_antennas();
  for (int k = 0; k < kr; ++k) {
    double trace = 0.0;
    if (scenario.uncertainty.kind == UncertaintyModel::Kind::Sphere) {
      trace = scenario.uncertainty.xi * n;
    } else {
      const CMat& b = scenario.uncertainty.shapes.at(k);
      trace = (b * b.adjoint()).trace().real();
    }
    caps(k) = (kr - 1) * trace;
  }
  return caps;
}

ZfResult solve_zf(const Scenario& scenario, const ChannelRealization& realization,
                  const ZfConfig& config, const ConicBackend& backend) {
  const int kr = scenario.num_users;
  RVec caps = config.interference_caps;
  if (caps.size() == 1 && kr > 1) caps = RVec::Constant(kr, caps(0));
  if (caps.size() != kr) throw std::invalid_argument("solve_zf: one cap per user expected");
  if ((caps.array() < 0.0).any()) throw std::invalid_argument("solve_zf: caps must be >= 0");

  ZfResult result;
  const ZfGeometry geo = zf_geometry(scenario, realization, caps);
  if (!geo.feasible) {
    result.note = geo.note;
    return result;
  }

  // Variable layout: Hermitian W_k blocks, then eta, then the epigraph t.
  std::vector<HermVar> wvars(kr);
  int next = 0;
  for (int k = 0; k < kr; ++k) {
    wvars[k].offset = next;
    wvars[k].dim = static_cast<int>(geo.bases[k].cols());
    next += wvars[k].count();
  }
  const int eta0 = next;
  next += kr;
  const int tvar = next++;
  const int num_vars = next;

  const ComposedObjective objective{config.system_utility, config.user_utility};

  // Signal/interference coupling in compressed coordinates.
  std::vector<std::vector<CVec>> coef(kr, std::vector<CVec>(kr));
  for (int k = 0; k < kr; ++k) {
    for (int j = 0; j < kr; ++j) coef[k][j] = geo.bases[j].adjoint() * geo.masked_channels[k];
  }

  const bool exact_sum = config.user_utility.kind == UserUtilityKind::InverseMse &&
                         config.system_utility.kind == SystemUtilityKind::WeightedSum;
  const bool exact_maxmin = config.user_utility.kind == UserUtilityKind::InverseMse &&
                            config.system_utility.kind == SystemUtilityKind::MaxMin;
  const RVec weights = config.system_utility.effective_weights(kr);

  auto build_and_solve = [&](const std::vector<Cut>& cuts) {
    ConeProgramBuilder b(num_vars);
    if (exact_sum) {
      LinExpr obj(num_vars);
      for (int k = 0; k < kr; ++k) obj -= weights(k) * b.variable(eta0 + k);
      b.minimize(obj);
    } else {
      b.minimize(-1.0 * b.variable(tvar));
    }
    for (int k = 0; k < kr; ++k) {
      b.add_nonnegative(b.variable(eta0 + k));
      // numerator: tr(W_k c c^H) >= eta_k (sigma^2 + z_k)
      const CMat m = coef[k][k] * coef[k][k].adjoint();
      LinExpr numerator = wvars[k].trace_against(b, m);
      numerator -= (scenario.noise_variances(k) + caps(k)) * b.variable(eta0 + k);
      b.add_nonnegative(numerator);
      // received interference cap for z_k > 0 users (zero caps live in the
      // subspace geometry)
      if (caps(k) > 0.0) {
        LinExpr interference(num_vars);
        for (int j = 0; j < kr; ++j) {
          if (j == k) continue;
          interference += wvars[j].trace_against(b, CMat(coef[k][j] * coef[k][j].adjoint()));
        }
        b.add_nonnegative(b.constant(caps(k)) - interference);
      }
    }
    for (const auto& pc : scenario.power_constraints) {
      LinExpr used(num_vars);
      for (int k = 0; k < kr; ++k) {
        used += wvars[k].trace_against(b, CMat(geo.bases[k].adjoint() * pc.q_matrix * geo.bases[k]));
      }
      b.add_nonnegative(b.constant(pc.limit) - used);
    }
    if (exact_maxmin) {
      for (int k = 0; k < kr; ++k) {
        b.add_nonnegative(weights(k) * b.variable(eta0 + k) - b.variable(tvar));
      }
    } else if (!exact_sum) {
      for (const Cut& cut : cuts) {
        LinExpr e = b.constant(cut.offset) - b.variable(tvar);
        for (int k = 0; k < kr; ++k) e += cut.slope(k) * b.variable(eta0 + k);
        b.add_nonnegative(e);
      }
    }
    for (int k = 0; k < kr; ++k) {
      const int d = wvars[k].dim;
      std::vector<std::vector<CLinExpr>> m(d, std::vector<CLinExpr>(d, CLinExpr(num_vars)));
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j <= i; ++j) m[i][j] = wvars[k].entry(b, i, j);
      }
      b.add_hermitian_semidefinite(m);
    }
    ConicSolution sol = backend.solve(b.build());
    if (!sol.ok() && !(sol.primal_residual < 1e-6 && sol.dual_residual < 1e-6)) {
      throw SolverError("solve_zf: relaxation solve failed");
    }
    return sol;
  };

  std::vector<Cut> cuts;
  ConicSolution sol;
  RVec eta_best;
  double f_best = -std::numeric_limits<double>::infinity();
  if (exact_sum || exact_maxmin) {
    sol = build_and_solve(cuts);
    eta_best = sol.x.segment(eta0, kr).cwiseMax(0.0);
    f_best = objective.value(eta_best);
  } else {
    RVec cut_point = RVec::Ones(kr);
    for (int iter = 0; iter < 40; ++iter) {
      const RVec p = cut_point.cwiseMax(1e-8);
      cuts.push_back({objective.value(p) - objective.supergradient(p).dot(p), objective.supergradient(p)});
      sol = build_and_solve(cuts);
      const RVec eta = sol.x.segment(eta0, kr).cwiseMax(0.0);
      const double fv = objective.value(eta);
      if (fv > f_best) {
        f_best = fv;
        eta_best = eta;
      }
      const double t_upper = sol.x(tvar);
      if (t_upper - fv <= 1e-7 * std::max(1.0, std::abs(fv))) break;
      cut_point = eta;
    }
  }
  result.sdr_value = f_best;

  std::vector<CMat> v_solutions(kr);
  for (int k = 0; k < kr; ++k) {
    const CMat w = wvars[k].value(sol.x);
    v_solutions[k] = geo.bases[k] * w * geo.bases[k].adjoint();
  }
  ZfConfig cfg = config;
  cfg.interference_caps = caps;
  result.beamformers = extract_rank_one(v_solutions, scenario, realization, cfg, backend);

  // Realized SINR against the cap-based denominator of the design problem.
  result.eta = RVec::Zero(kr);
  for (int k = 0; k < kr; ++k) {
    const CVec dv = geo.selection.data_masks[k].array() * result.beamformers[k].array();
    const double signal = std::norm(geo.masked_channels[k].dot(dv));
    result.eta(k) = signal / (scenario.noise_variances(k) + caps(k));
  }
  result.extracted_value = objective.value(result.eta);
  result.feasible = true;
  const double rel_gap = (result.sdr_value - result.extracted_value) /
                         std::max(1.0, std::abs(result.sdr_value));
  result.extraction_degraded = rel_gap > 1e-3;
  return result;
}

std::vector<CVec> extract_rank_one(const std::vector<CMat>& v_solutions, const Scenario& scenario,
                                   const ChannelRealization& realization, const ZfConfig& config,
                                   const ConicBackend& backend) {
  const int kr = scenario.num_users;
  RVec caps = config.interference_caps;
  if (caps.size() == 1 && kr > 1) caps = RVec::Constant(kr, caps(0));
  const ZfGeometry geo = zf_geometry(scenario, realization, caps);
  if (!geo.feasible) throw std::invalid_argument("extract_rank_one: " + geo.note);

  std::vector<CVec> out(kr);
  const int n = scenario.total_antennas();
  for (int k = 0; k < kr; ++k) {
    const CMat& v = v_solutions.at(k);
    if (v.norm() <= 1e-12) {
      out[k] = CVec::Zero(n);
      continue;
    }
    Eigen::SelfAdjointEigenSolver<CMat> es(v);
    const RVec evals = es.eigenvalues();
    const double top = evals(evals.size() - 1);
    const double second = evals.size() > 1 ? std::max(0.0, evals(evals.size() - 2)) : 0.0;
    if (second <= kRankOneRatio * top) {
      out[k] = phase_align(CVec(std::sqrt(top) * es.eigenvectors().col(evals.size() - 1)),
                           geo.masked_channels[k]);
      continue;
    }
    // Second stage: maximize the real signal gain under trace-bounded
    // interference and power constraints, in the beamforming subspace.
    const CMat& basis = geo.bases[k];
    const int d = static_cast<int>(basis.cols());
    const CMat w = basis.adjoint() * v * basis;
    ConeProgramBuilder b(2 * d);
    auto u_expr = [&](const CVec& a) {
      // a^H u with u = (Re, Im) blocks
      CLinExpr e(2 * d);
      for (int i = 0; i < d; ++i) {
        e.re.coeffs(i) += a(i).real();
        e.re.coeffs(d + i) += a(i).imag();
        e.im.coeffs(d + i) += a(i).real();
        e.im.coeffs(i) -= a(i).imag();
      }
      return e;
    };
    const CVec c = basis.adjoint() * geo.masked_channels[k];
    b.minimize(-1.0 * u_expr(c).re);
    for (int r = 0; r < kr; ++r) {
      if (r == k) continue;
      const CVec m = basis.adjoint() * geo.masked_channels[r];
      if (m.norm() <= 1e-12) continue;  // nulled by the subspace
      const double cap = std::max(0.0, std::real(m.dot(w * m)));
      const CLinExpr e = u_expr(m);
      b.add_quadratic_bound({e.re, e.im}, b.constant(cap + 1e-12));
    }
    for (const auto& pc : scenario.power_constraints) {
      const CMat q = basis.adjoint() * pc.q_matrix * basis;
      const double budget = std::max(0.0, std::real((q * w).trace()));
      Eigen::SelfAdjointEigenSolver<CMat> qe(q);
      std::vector<LinExpr> rows;
      for (int e = 0; e < d; ++e) {
        if (qe.eigenvalues()(e) <= 1e-12 * std::max(1.0, qe.eigenvalues().maxCoeff())) continue;
        const CVec dir = std::sqrt(qe.eigenvalues()(e)) * qe.eigenvectors().col(e);
        const CLinExpr ex = u_expr(dir);
        rows.push_back(ex.re);
        rows.push_back(ex.im);
      }
      if (!rows.empty()) b.add_quadratic_bound(rows, b.constant(budget + 1e-12));
    }
    const ConicSolution sol = backend.solve(b.build());
    if (!sol.ok() && !(sol.primal_residual < 1e-6 && sol.dual_residual < 1e-6)) {
      throw SolverError("extract_rank_one: second-stage solve failed");
    }
    CVec u(d);
    for (int i = 0; i < d; ++i) u(i) = Complex(sol.x(i), sol.x(d + i));
    out[k] = phase_align(CVec(basis * u), geo.masked_channels[k]);
  }
  return out;
}

RVec StrategyEvaluation::g_values(const std::vector<UserUtility>& utilities) const {
  RVec g(robust_mse.size());
  for (int k = 0; k < robust_mse.size(); ++k) {
    g(k) = utilities[k].eval(std::clamp(robust_mse(k), 1e-300, 1.0));
  }
  return g;
}

StrategyEvaluation evaluate_strategy(const Scenario& scenario, const ChannelRealization& realization,
                                     const std::vector<CVec>& beamformers, EqualizerRule rule,
                                     const ConicBackend& backend,
                                     const std::optional<RVec>& given_equalizers) {
  const int kr = scenario.num_users;
  const SelectionMatrices sel = selection_matrices(scenario);
  std::vector<CVec> v = beamformers;
  RVec r(kr);
  if (rule == EqualizerRule::Given) {
    if (!given_equalizers || given_equalizers->size() != kr) {
      throw std::invalid_argument("evaluate_strategy: equalizers required for the Given rule");
    }
    r = *given_equalizers;
  } else {
    // Nominal-optimal rule: align each signal phase, then apply the MMSE
    // coefficient computed from the estimates.
    for (int k = 0; k < kr; ++k) {
      const CVec pilot = sel.coord_masks[k].array() * realization.estimates[k].array();
      v[k] = phase_align(CVec(sel.data_masks[k].array() * v[k].array()), pilot);
    }
    for (int k = 0; k < kr; ++k) {
      r(k) = optimal_equalizer_perfect_csi(realization, sel, v, k, scenario);
    }
  }
  StrategyEvaluation eval{RVec::Zero(kr), r, Strategy(std::move(v), r, sel)};
  for (int k = 0; k < kr; ++k) {
    if (realization.uncertainty_shapes[k].norm() == 0.0) {
      eval.robust_mse(k) =
          mse_nominal(realization, sel, eval.strategy, k, realization.estimates[k], scenario);
    } else {
      eval.robust_mse(k) = worst_case_mse(scenario, realization, eval.strategy, k, backend);
    }
  }
  return eval;
}

}  // namespace mcbf
