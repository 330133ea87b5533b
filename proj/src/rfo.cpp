// SPDX-License-Identifier: Apache-2.0

#include "mcbf/rfo.hpp"

#include <cmath>

namespace mcbf {

ScenarioOracle::ScenarioOracle(const Scenario& scenario, const ChannelRealization& realization,
                               std::vector<UserUtility> utilities, const ConicBackend& backend)
    : scenario_(scenario), realization_(realization), utilities_(std::move(utilities)), backend_(backend) {
  if (static_cast<int>(utilities_.size()) != scenario.num_users) {
    throw std::invalid_argument("ScenarioOracle: one utility per user expected");
  }
}

OracleResult ScenarioOracle::contains(const RVec& point) {
  RVec gamma(point.size());
  for (int k = 0; k < point.size(); ++k) {
    const auto mse = utilities_[k].try_inverse(point(k));
    if (!mse) return {false, std::nullopt};  // beyond the utility's range
    gamma(k) = *mse;
  }
  FeasibilityOutcome out = check_feasible(scenario_, realization_, gamma, backend_);
  return {out.feasible, std::move(out.strategy)};
}

void FairnessProfile::validate() const {
  if (start.size() != direction.size()) throw std::invalid_argument("FairnessProfile: size mismatch");
  if ((start.array() < 0.0).any()) throw std::invalid_argument("FairnessProfile: start must be >= 0");
  if ((direction.array() < 0.0).any()) {
    throw std::invalid_argument("FairnessProfile: direction must be >= 0");
  }
  if (std::abs(direction.lpNorm<1>() - 1.0) > 1e-12) {
    throw std::invalid_argument("FairnessProfile: direction must sum to 1");
  }
}

namespace {

OracleResult query_with_retry(PerformanceOracle& oracle, const RVec& point) {
  try {
    return oracle.contains(point);
  } catch (const SolverError&) {
    return oracle.contains(point);  // retried once, then the error propagates
  }
}

}  // namespace

RfoResult solve_rfo(PerformanceOracle& oracle, const FairnessProfile& profile, double delta,
                    double f_upper, const RfoOptions& options) {
  profile.validate();
  if (!(delta > 0.0)) throw std::invalid_argument("solve_rfo: delta must be positive");
  if (!(f_upper > 0.0)) throw std::invalid_argument("solve_rfo: f_upper must be positive");

  RfoResult result;
  if (!options.skip_initial_check) {
    OracleResult r0 = query_with_retry(oracle, profile.start);
    ++result.evaluations;
    if (!r0.feasible) throw InfeasibleStart("solve_rfo: the starting point is outside the region");
    result.strategy = std::move(r0.strategy);
  }

  double lo = 0.0, hi = f_upper;
  int iters = 0;
  while (hi - lo > delta && iters < options.max_iterations) {
    const double candidate = 0.5 * (lo + hi);
    OracleResult r = query_with_retry(oracle, profile.start + candidate * profile.direction);
    ++result.evaluations;
    if (r.feasible) {
      lo = candidate;
      if (r.strategy) result.strategy = std::move(r.strategy);
    } else {
      hi = candidate;
    }
    ++iters;
  }
  result.f_lo = lo;
  result.f_hi = hi;
  result.point = profile.start + lo * profile.direction;
  result.converged = hi - lo <= delta;
  return result;
}

namespace {

double smallest_positive_eigenvalue(const CMat& m) {
  Eigen::SelfAdjointEigenSolver<CMat> es(m, Eigen::EigenvaluesOnly);
  const RVec ev = es.eigenvalues();
  const double lmax = std::max(ev.maxCoeff(), 0.0);
  double best = 0.0;
  for (int i = 0; i < ev.size(); ++i) {
    if (ev(i) > 1e-12 * std::max(1.0, lmax) && (best == 0.0 || ev(i) < best)) best = ev(i);
  }
  return best;
}

/// Power cap kappa_k: the loosest single-constraint bound on usable transmit
/// power in the serving subspace, max_l q_l tr(D_k) / min-positive-eig of
/// D_k^H Q_l D_k.
double power_cap(const Scenario& scenario, const SelectionMatrices& sel, int user) {
  const RMat d = sel.data_matrix(user);
  const double trace = sel.data_masks[user].sum();
  if (trace <= 0.0) return 0.0;
  double cap = 0.0;
  for (const auto& pc : scenario.power_constraints) {
    const CMat restricted = d * pc.q_matrix * d;
    const double eig = smallest_positive_eigenvalue(restricted);
    if (eig > 0.0) cap = std::max(cap, pc.limit * trace / eig);
  }
  return cap;
}

/// Lower bound on the best single-user robust MSE through bisection on the
/// feasibility oracle with every other user's target vacuous.
double single_user_mse_lower_bound(const Scenario& scenario, const ChannelRealization& realization,
                                   int user, const ConicBackend& backend) {
  RVec gamma = RVec::Ones(scenario.num_users);
  double lo = 1e-9, hi = 1.0;
  gamma(user) = lo;
  if (check_feasible(scenario, realization, gamma, backend).feasible) return lo;
  for (int it = 0; it < 40 && hi - lo > 1e-7 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    gamma(user) = mid;
    if (check_feasible(scenario, realization, gamma, backend).feasible) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return lo;  // infeasible side: guaranteed <= the true minimum
}

}  // namespace

RVec per_user_performance_caps(const Scenario& scenario, const ChannelRealization& realization,
                               const std::vector<UserUtility>& utilities, UpperBoundMethod method,
                               const ConicBackend& backend) {
  const int kr = scenario.num_users;
  if (static_cast<int>(utilities.size()) != kr) {
    throw std::invalid_argument("per_user_performance_caps: one utility per user expected");
  }
  const SelectionMatrices sel = selection_matrices(scenario);
  RVec caps(kr);
  for (int k = 0; k < kr; ++k) {
    switch (method) {
      case UpperBoundMethod::Sup:
        if (!utilities[k].finite_at_zero_mse()) {
          throw std::invalid_argument("per_user_performance_caps: Sup needs finite g(0)");
        }
        caps(k) = utilities[k].value_at_zero_mse();
        break;
      case UpperBoundMethod::PowerBound: {
        const double kappa = power_cap(scenario, sel, k);
        const CVec dh = sel.data_masks[k].array() * realization.estimates[k].array();
        const double sigma2 = scenario.noise_variances(k);
        const double mse = sigma2 / (kappa * dh.squaredNorm() + sigma2);
        caps(k) = utilities[k].eval(std::min(1.0, std::max(mse, 1e-300)));
        break;
      }
      case UpperBoundMethod::SingleUser: {
        const double mse = single_user_mse_lower_bound(scenario, realization, k, backend);
        caps(k) = utilities[k].eval(std::min(1.0, mse));
        break;
      }
    }
  }
  return caps;
}

double initial_upper_bound(const Scenario& scenario, const ChannelRealization& realization,
                           const std::vector<UserUtility>& utilities, const FairnessProfile& profile,
                           UpperBoundMethod method, const ConicBackend& backend) {
  profile.validate();
  const int kr = scenario.num_users;
  const RVec caps = per_user_performance_caps(scenario, realization, utilities, method, backend);
  double bound = 0.0;
  if (method == UpperBoundMethod::Sup) {
    bound = kr * (caps - profile.start).maxCoeff();
  } else {
    bound = (caps - profile.start).sum();
  }
  if (!(bound > 0.0)) bound = 1e-6;

  // Certify that start + direction * bound is outside the region.
  ScenarioOracle oracle(scenario, realization, utilities, backend);
  for (int attempt = 0; attempt < 40; ++attempt) {
    if (!oracle.contains(profile.start + bound * profile.direction).feasible) return bound;
    bound *= 2.0;
  }
  throw SolverError("initial_upper_bound: failed to certify an infeasible upper point");
}

}  // namespace mcbf
