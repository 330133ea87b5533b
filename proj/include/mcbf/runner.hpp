// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mcbf/baselines.hpp"
#include "mcbf/brb.hpp"
#include "mcbf/rfo.hpp"
#include "mcbf/serialize.hpp"

namespace mcbf {

constexpr int kSchemaVersion = 1;

/// Per-user caps on achievable performance for the initial BRB box, computed
/// with the same constructions as the RFO upper bound.
RVec initial_box(const Scenario& scenario, const ChannelRealization& realization,
                 const std::vector<UserUtility>& utilities, UpperBoundMethod method,
                 const ConicBackend& backend);

struct RegionRow {
  double theta = 0.0;
  double f_value = 0.0;
  RVec g_point;
  RVec mse_point;
};

/// Boundary sweep over fairness profiles alpha(theta) = (theta, 1 - theta)
/// (uniform simplex grid for more than two users).
std::vector<RegionRow> trace_region(const Scenario& scenario, const ChannelRealization& realization,
                                    const std::vector<UserUtility>& utilities, int num_profiles,
                                    double delta, const ConicBackend& backend);

struct RunConfig {
  Scenario scenario;
  RMat snr_gains;  // empty -> gain(j, k) = N_j
  std::uint64_t seed = 1;
  int ensemble = 1;
  UserUtility user_utility;
  SystemUtility system_utility;
  double eps = 0.05;
  double delta = 1e-3;
  UpperBoundMethod f_upper_method = UpperBoundMethod::PowerBound;
  RVec profile_start;      // empty -> zeros
  RVec profile_direction;  // empty -> uniform
  RVec z_caps;             // empty -> auto heuristic
  long max_evaluations = 200000;
  double relative_gap_target = 0.0;
  Json strategy_json;  // for `evaluate`
};

struct RunOutput {
  Json result;
  std::string trace_csv;  // brb convergence trace, empty otherwise
};

RunOutput run_rfo(const RunConfig& config, std::uint64_t seed);
RunOutput run_brb(const RunConfig& config, std::uint64_t seed);
RunOutput run_zf(const RunConfig& config, std::uint64_t seed);
RunOutput run_brute(const RunConfig& config, std::uint64_t seed);
RunOutput run_evaluate(const RunConfig& config, std::uint64_t seed);

struct EnsembleOutput {
  std::vector<RunOutput> runs;  // ordered by seed
  std::string aggregate_csv;    // seed, objective, evaluations per row + stats
};

EnsembleOutput run_ensemble(const RunConfig& config, const std::string& algorithm);

RMat default_snr_gains(const Scenario& scenario);

}  // namespace mcbf
