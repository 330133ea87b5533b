// SPDX-License-Identifier: Apache-2.0

#include "mcbf/utility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mcbf {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double UserUtility::eval(double mse) const {
  if (!(mse > 0.0) || mse > 1.0) throw std::domain_error("UserUtility::eval: mse outside (0, 1]");
  switch (kind) {
    case UserUtilityKind::InverseMse:
      return 1.0 / mse - 1.0;
    case UserUtilityKind::Rate:
      return std::log2(1.0 / mse);
    case UserUtilityKind::NegMse:
      return 1.0 - mse;
  }
  throw std::logic_error("unreachable");
}

std::optional<double> UserUtility::try_inverse(double value) const {
  if (value < 0.0 || !(value < value_at_zero_mse())) return std::nullopt;
  switch (kind) {
    case UserUtilityKind::InverseMse:
      return 1.0 / (1.0 + value);
    case UserUtilityKind::Rate:
      return std::exp2(-value);
    case UserUtilityKind::NegMse:
      return 1.0 - value;
  }
  throw std::logic_error("unreachable");
}

double UserUtility::inverse(double value) const {
  const auto mse = try_inverse(value);
  if (!mse) throw std::domain_error("UserUtility::inverse: value outside the utility range");
  return *mse;
}

double UserUtility::value_at_zero_mse() const {
  switch (kind) {
    case UserUtilityKind::InverseMse:
    case UserUtilityKind::Rate:
      return kInf;
    case UserUtilityKind::NegMse:
      return 1.0;
  }
  throw std::logic_error("unreachable");
}

bool UserUtility::finite_at_zero_mse() const { return std::isfinite(value_at_zero_mse()); }

UserUtilityKind parse_user_utility(const std::string& name) {
  if (name == "inverse-mse") return UserUtilityKind::InverseMse;
  if (name == "rate") return UserUtilityKind::Rate;
  if (name == "neg-mse") return UserUtilityKind::NegMse;
  throw std::invalid_argument("unknown user utility: " + name);
}

std::string user_utility_name(UserUtilityKind kind) {
  switch (kind) {
    case UserUtilityKind::InverseMse:
      return "inverse-mse";
    case UserUtilityKind::Rate:
      return "rate";
    case UserUtilityKind::NegMse:
      return "neg-mse";
  }
  throw std::logic_error("unreachable");
}

RVec SystemUtility::effective_weights(int dim) const {
  if (weights.size() == 0) return RVec::Ones(dim);
  if (weights.size() != dim) throw std::invalid_argument("SystemUtility: weight dimension mismatch");
  if ((weights.array() <= 0.0).any()) throw std::invalid_argument("SystemUtility: weights must be positive");
  return weights;
}

double SystemUtility::eval(const RVec& g) const {
  const int n = static_cast<int>(g.size());
  const RVec w = effective_weights(n);
  switch (kind) {
    case SystemUtilityKind::WeightedSum:
      return w.dot(g);
    case SystemUtilityKind::MaxMin:
      return (w.array() * g.array()).minCoeff();
    case SystemUtilityKind::ProportionalFairness: {
      // Weighted geometric mean: prod g_k^{w_k / sum(w)}; 0 if any g_k = 0.
      const double wsum = w.sum();
      double logsum = 0.0;
      for (int k = 0; k < n; ++k) {
        if (g(k) <= 0.0) return 0.0;
        logsum += w(k) / wsum * std::log(g(k));
      }
      return std::exp(logsum);
    }
    case SystemUtilityKind::HarmonicMean: {
      // Weighted harmonic mean: sum(w) / sum(w_k / g_k); 0 if any g_k = 0.
      double denom = 0.0;
      for (int k = 0; k < n; ++k) {
        if (g(k) <= 0.0) return 0.0;
        denom += w(k) / g(k);
      }
      return w.sum() / denom;
    }
  }
  throw std::logic_error("unreachable");
}

SystemUtilityKind parse_system_utility(const std::string& name) {
  if (name == "sum") return SystemUtilityKind::WeightedSum;
  if (name == "prop-fair") return SystemUtilityKind::ProportionalFairness;
  if (name == "harmonic") return SystemUtilityKind::HarmonicMean;
  if (name == "max-min") return SystemUtilityKind::MaxMin;
  throw std::invalid_argument("unknown system utility: " + name);
}

std::string system_utility_name(SystemUtilityKind kind) {
  switch (kind) {
    case SystemUtilityKind::WeightedSum:
      return "sum";
    case SystemUtilityKind::ProportionalFairness:
      return "prop-fair";
    case SystemUtilityKind::HarmonicMean:
      return "harmonic";
    case SystemUtilityKind::MaxMin:
      return "max-min";
  }
  throw std::logic_error("unreachable");
}

namespace {

constexpr double kCoeffTol = 1e-9;

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

// Largest t in [0,1] with pred(t) true, assuming pred is monotone
// (true below some threshold). pred(0) must hold. Returns the upper bisection
// endpoint so the reduction errs on the safe (larger-box) side.
template <typename Pred>
double largest_true(Pred pred) {
  if (pred(1.0)) return 1.0;
  double lo = 0.0, hi = 1.0;
  while (hi - lo > kCoeffTol) {
    const double mid = 0.5 * (lo + hi);
    if (pred(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

RVec lifted_lower(const RVec& a, const RVec& b, const RVec& nu) {
  RVec out = b;
  for (int k = 0; k < a.size(); ++k) out(k) -= nu(k) * (b(k) - a(k));
  return out;
}

}  // namespace

ReductionCoefficients reduction_coefficients(const SystemUtility& utility, const RVec& a,
                                             const RVec& b, double f_min, double beta) {
  if (f_min > beta) throw std::invalid_argument("reduction_coefficients: f_min > beta");
  if (utility.kind != SystemUtilityKind::WeightedSum) {
    return detail::reduction_coefficients_bisect(utility, a, b, f_min, beta);
  }
  const int n = static_cast<int>(a.size());
  const RVec w = utility.effective_weights(n);
  const double fb = utility.eval(b);
  ReductionCoefficients out{RVec::Ones(n), RVec::Ones(n)};
  for (int k = 0; k < n; ++k) {
    const double span = b(k) - a(k);
    if (span > 0.0) out.nu(k) = clamp01((fb - f_min) / (w(k) * span));
  }
  const RVec a2 = lifted_lower(a, b, out.nu);
  const double fa2 = utility.eval(a2);
  for (int k = 0; k < n; ++k) {
    const double span = b(k) - a2(k);
    if (span > 0.0) out.mu(k) = clamp01((beta - fa2) / (w(k) * span));
  }
  return out;
}

namespace detail {

ReductionCoefficients reduction_coefficients_bisect(const SystemUtility& utility, const RVec& a,
                                                    const RVec& b, double f_min, double beta) {
  if (f_min > beta) throw std::invalid_argument("reduction_coefficients: f_min > beta");
  const int n = static_cast<int>(a.size());
  ReductionCoefficients out{RVec::Ones(n), RVec::Ones(n)};
  const double fb = utility.eval(b);
  if (fb < f_min) {
    out.nu.setZero();
  } else {
    for (int k = 0; k < n; ++k) {
      const double span = b(k) - a(k);
      if (span <= 0.0) continue;
      out.nu(k) = largest_true([&](double nu) {
        RVec p = b;
        p(k) -= nu * span;
        return utility.eval(p) >= f_min;
      });
    }
  }
  const RVec a2 = lifted_lower(a, b, out.nu);
  if (utility.eval(a2) > beta) {
    out.mu.setZero();
    return out;
  }
  for (int k = 0; k < n; ++k) {
    const double span = b(k) - a2(k);
    if (span <= 0.0) continue;
    out.mu(k) = largest_true([&](double mu) {
      RVec p = a2;
      p(k) += mu * span;
      return utility.eval(p) <= beta;
    });
  }
  return out;
}

}  // namespace detail

}  // namespace mcbf
