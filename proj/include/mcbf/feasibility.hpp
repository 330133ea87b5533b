// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mcbf/conic.hpp"
#include "mcbf/scenario.hpp"

namespace mcbf {

/// Candidate solution: beamformers v_k and non-negative equalizing
/// coefficients r_k. Construction projects each v_k onto the serving mask
/// (v_k = D_k v_k).
struct Strategy {
  std::vector<CVec> beamformers;
  RVec equalizers;

  Strategy() = default;
  Strategy(std::vector<CVec> v, RVec r, const SelectionMatrices& selection);

  /// Largest relative violation of the power constraints (<= 0 when feasible).
  double power_violation(const Scenario& scenario) const;
};

struct FeasibilityOutcome {
  bool feasible = false;
  std::optional<Strategy> strategy;  // set when feasible
  RVec lambdas;                      // per-user multipliers of the robust LMI
  double margin = 0.0;               // maximized slack; > 0 when feasible
  std::string note;
};

class UnreachableTarget : public std::runtime_error {
 public:
  explicit UnreachableTarget(const std::string& what) : std::runtime_error(what) {}
};

/// MSE of user k for an exact channel h (Eq-by-term decomposition:
/// signal distortion + co-user interference + noise).
double mse_nominal(const ChannelRealization& realization, const SelectionMatrices& selection,
                   const Strategy& strategy, int user, const CVec& exact_channel,
                   const Scenario& scenario);

/// MMSE equalizer under perfect CSI, with the beamformer implicitly
/// phase-rotated so the signal inner product is real non-negative.
double optimal_equalizer_perfect_csi(const ChannelRealization& realization,
                                     const SelectionMatrices& selection,
                                     const std::vector<CVec>& beamformers, int user,
                                     const Scenario& scenario);

/// Largest root of MSE(r) = gamma: r = (a + sqrt(a^2 - (1-gamma) b)) / b with
/// a the real signal gain and b the total received power plus noise.
double equalizer_for_target_mse(double signal_gain, double total_power, double gamma);

/// Worst-case MSE certificate matrix A_k of the semidefinite reformulation;
/// Hermitian of side N + K_r + 2. stacked_beamformers columns are D_k v_k.
CMat build_robust_lmi(const ChannelRealization& realization, const SelectionMatrices& selection,
                      const CMat& stacked_beamformers, double r_tilde, double lambda, double gamma,
                      int user, const Scenario& scenario);

/// Convex feasibility oracle for per-user worst-case MSE targets gamma_k in
/// (0, 1]. WorstCase scenarios use the per-user LMI; PerfectCsi scenarios use
/// the second-order-cone form. Returns a certificate Strategy when feasible.
FeasibilityOutcome check_feasible(const Scenario& scenario, const ChannelRealization& realization,
                                  const RVec& gamma, const ConicBackend& backend);

/// Robust MSE of user k under the given strategy: minimal gamma with
/// A_k(1/r_k, sqrt(gamma)) PSD. Returns 1 when r_k = 0.
double worst_case_mse(const Scenario& scenario, const ChannelRealization& realization,
                      const Strategy& strategy, int user, const ConicBackend& backend);

namespace detail {
/// Clamps an MSE target to [1e-9, 1] before constraint construction.
double clamp_gamma(double gamma);
/// Targets at least this close to 1 are treated as vacuous constraints.
bool gamma_vacuous(double gamma, CsiMode mode);
}  // namespace detail

}  // namespace mcbf
