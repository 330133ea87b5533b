// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "mcbf/feasibility.hpp"
#include "mcbf/utility.hpp"

namespace mcbf {

/// Membership test against a compact normal region in user-performance
/// (g) space. The scenario-backed oracle maps a point to MSE targets through
/// the user utilities and solves the convex feasibility problem; analytic
/// oracles are injected in tests and by the branch-and-bound safety suites.
struct OracleResult {
  bool feasible = false;
  std::optional<Strategy> strategy;
};

class PerformanceOracle {
 public:
  virtual ~PerformanceOracle() = default;
  virtual OracleResult contains(const RVec& point) = 0;
};

class LambdaOracle : public PerformanceOracle {
 public:
  explicit LambdaOracle(std::function<bool(const RVec&)> fn) : fn_(std::move(fn)) {}
  OracleResult contains(const RVec& point) override { return {fn_(point), std::nullopt}; }

 private:
  std::function<bool(const RVec&)> fn_;
};

/// Counts every membership query; shared by RFO and BRB so evaluation counts
/// in results refer to feasibility-problem solves.
class CountingOracle : public PerformanceOracle {
 public:
  explicit CountingOracle(PerformanceOracle& inner) : inner_(inner) {}
  OracleResult contains(const RVec& point) override {
    ++count_;
    return inner_.contains(point);
  }
  long count() const { return count_; }

 private:
  PerformanceOracle& inner_;
  long count_ = 0;
};

/// g-space oracle backed by check_feasible: a point maps to MSE targets
/// gamma_k = g_k^{-1}(point_k); points above a utility's range are infeasible
/// outright.
class ScenarioOracle : public PerformanceOracle {
 public:
  ScenarioOracle(const Scenario& scenario, const ChannelRealization& realization,
                 std::vector<UserUtility> utilities, const ConicBackend& backend);
  OracleResult contains(const RVec& point) override;

 private:
  const Scenario& scenario_;
  const ChannelRealization& realization_;
  std::vector<UserUtility> utilities_;
  const ConicBackend& backend_;
};

/// Ray through the performance region: start a >= 0 and direction alpha >= 0
/// with ||alpha||_1 = 1 (within 1e-12).
struct FairnessProfile {
  RVec start;
  RVec direction;

  void validate() const;
};

struct RfoResult {
  double f_lo = 0.0;
  double f_hi = 0.0;
  RVec point;  // start + direction * f_lo
  std::optional<Strategy> strategy;
  long evaluations = 0;
  bool converged = false;
};

class InfeasibleStart : public std::runtime_error {
 public:
  explicit InfeasibleStart(const std::string& what) : std::runtime_error(what) {}
};

struct RfoOptions {
  int max_iterations = 64;
  /// The caller already certified oracle(start) feasible; skip the f = 0 probe.
  bool skip_initial_check = false;
};

/// Bisection along the profile ray. A solver error at a midpoint is retried
/// once before the run aborts.
RfoResult solve_rfo(PerformanceOracle& oracle, const FairnessProfile& profile, double delta,
                    double f_upper, const RfoOptions& options = {});

enum class UpperBoundMethod { Sup, PowerBound, SingleUser };

/// Per-user caps on achievable performance: g_k(0) for Sup, the
/// power-ignoring-interference bound for PowerBound, and the single-user
/// optimum for SingleUser. Every point of the region satisfies g <= caps.
RVec per_user_performance_caps(const Scenario& scenario, const ChannelRealization& realization,
                               const std::vector<UserUtility>& utilities, UpperBoundMethod method,
                               const ConicBackend& backend);

/// Initial f_upper for the bisection: Sup ignores power, PowerBound ignores
/// interference and uncertainty, SingleUser solves per-user problems and is
/// tightest. The returned value is certified: start + direction * f_upper is
/// infeasible (doubling when the raw formula falls short).
double initial_upper_bound(const Scenario& scenario, const ChannelRealization& realization,
                           const std::vector<UserUtility>& utilities, const FairnessProfile& profile,
                           UpperBoundMethod method, const ConicBackend& backend);

}  // namespace mcbf
