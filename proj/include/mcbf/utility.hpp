// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <utility>

#include "mcbf/linalg.hpp"

namespace mcbf {

// ---------------------------------------------------------------------------
// User performance g_k: strictly decreasing in the MSE, g(1) = 0.
// ---------------------------------------------------------------------------

enum class UserUtilityKind {
  InverseMse,  // g(m) = 1/m - 1   (SINR)
  Rate,        // g(m) = log2(1/m)
  NegMse,      // g(m) = 1 - m
};

struct UserUtility {
  UserUtilityKind kind = UserUtilityKind::InverseMse;

  /// g(mse); mse must lie in (0, 1].
  double eval(double mse) const;

  /// g^{-1}(value); value must lie in [0, g(0+)).
  double inverse(double value) const;

  /// g^{-1} that reports out-of-range values instead of throwing.
  std::optional<double> try_inverse(double value) const;

  /// g(0+); +inf for InverseMse and Rate.
  double value_at_zero_mse() const;

  bool finite_at_zero_mse() const;
};

UserUtilityKind parse_user_utility(const std::string& name);
std::string user_utility_name(UserUtilityKind kind);

// ---------------------------------------------------------------------------
// System performance f: strictly increasing on the non-negative orthant.
// ---------------------------------------------------------------------------

enum class SystemUtilityKind { WeightedSum, ProportionalFairness, HarmonicMean, MaxMin };

struct SystemUtility {
  SystemUtilityKind kind = SystemUtilityKind::WeightedSum;
  RVec weights;  // empty means all-ones

  double eval(const RVec& g) const;

  /// Weight vector expanded to the given dimension.
  RVec effective_weights(int dim) const;

  bool is_concave() const { return true; }  // all four kinds are concave
};

SystemUtilityKind parse_system_utility(const std::string& name);
std::string system_utility_name(SystemUtilityKind kind);

// ---------------------------------------------------------------------------
// Box reduction coefficients. For a box [a, b] and bounds f_min <= beta,
//   nu_k  = largest nu  in [0,1] with f(b - nu*(b_k - a_k) e_k) >= f_min
//   mu_k  = largest mu  in [0,1] with f(a' + mu*(b_k - a'_k) e_k) <= beta
// where a' = b - sum_k nu_k (b_k - a_k) e_k is formed first. Weighted-sum
// utilities use the closed form; other kinds use scalar bisection to an
// absolute tolerance of 1e-9 on the coefficient.
// ---------------------------------------------------------------------------

struct ReductionCoefficients {
  RVec nu;
  RVec mu;
};

ReductionCoefficients reduction_coefficients(const SystemUtility& utility, const RVec& a,
                                             const RVec& b, double f_min, double beta);

namespace detail {
/// Generic bisection path, exposed so tests can cross-check the closed form.
ReductionCoefficients reduction_coefficients_bisect(const SystemUtility& utility, const RVec& a,
                                                    const RVec& b, double f_min, double beta);
}  // namespace detail

}  // namespace mcbf
