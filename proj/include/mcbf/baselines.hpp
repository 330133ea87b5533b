// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <vector>

#include "mcbf/feasibility.hpp"
#include "mcbf/utility.hpp"

namespace mcbf {

/// Interference-constrained beamforming setup. Caps z_k bound the total
/// nominal interference received by user k; all-zero caps give zero-forcing.
/// The design treats channel estimates as exact; eta stays in SINR units
/// (g = 1/MSE - 1) unless a different user utility is composed in, in which
/// case the concave objective f(g(1/(1+eta))) is maximized.
struct ZfConfig {
  RVec interference_caps;
  SystemUtility system_utility;
  UserUtility user_utility{UserUtilityKind::InverseMse};
};

struct ZfResult {
  bool feasible = false;
  std::vector<CVec> beamformers;
  RVec eta;            // realized nominal SINRs of the extracted beamformers
  double sdr_value = 0.0;        // objective of the semidefinite relaxation
  double extracted_value = 0.0;  // objective of the rank-one beamformers
  bool extraction_degraded = false;  // gap above 1e-3 relative
  std::string note;
};

ZfResult solve_zf(const Scenario& scenario, const ChannelRealization& realization,
                  const ZfConfig& config, const ConicBackend& backend);

/// Rank-one beamformers from the relaxation's PSD solutions. Matrices that
/// are already rank one (second eigenvalue <= 1e-7 of the first) yield their
/// scaled dominant eigenvector; otherwise the per-user second-stage program
/// maximizes the real signal gain under trace-bounded interference and power
/// constraints.
std::vector<CVec> extract_rank_one(const std::vector<CMat>& v_solutions, const Scenario& scenario,
                                   const ChannelRealization& realization, const ZfConfig& config,
                                   const ConicBackend& backend);

enum class EqualizerRule { NominalOptimal, Given };

struct StrategyEvaluation {
  RVec robust_mse;  // worst-case MSE per user, capped at 1 for g-mapping
  RVec equalizers;
  Strategy strategy;

  RVec g_values(const std::vector<UserUtility>& utilities) const;
};

/// Robust evaluation of arbitrary beamformers: equalizers come from the
/// nominal-optimal rule (treating estimates as exact) or are given, then each
/// user's worst-case MSE is computed.
StrategyEvaluation evaluate_strategy(const Scenario& scenario, const ChannelRealization& realization,
                                     const std::vector<CVec>& beamformers, EqualizerRule rule,
                                     const ConicBackend& backend,
                                     const std::optional<RVec>& given_equalizers = std::nullopt);

/// The auto heuristic for interference caps: z_k = (K_r - 1) * N * xi.
RVec auto_interference_caps(const Scenario& scenario);

}  // namespace mcbf
