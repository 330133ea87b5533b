// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mcbf/linalg.hpp"

namespace mcbf {

enum class CsiMode { PerfectCsi, WorstCase };

/// One quadratic power constraint: sum_k v_k^H Q v_k <= limit.
struct PowerConstraint {
  CMat q_matrix;
  double limit = 0.0;
};

/// Shape of the per-user channel uncertainty ellipsoids.
struct UncertaintyModel {
  enum class Kind { Sphere, Explicit };
  Kind kind = Kind::Sphere;
  double xi = 0.0;            // squared sphere radius, B_k = sqrt(xi) * I
  std::vector<CMat> shapes;   // explicit per-user B_k (N x N)
};

/// Immutable multicell system description: transmitters, users, dynamic
/// cooperation clusters, power constraints, noise and uncertainty.
struct Scenario {
  int num_transmitters = 0;
  std::vector<int> antennas;                     // N_j per transmitter
  int num_users = 0;
  std::vector<std::vector<int>> data_clusters;   // D_j: users served with data
  std::vector<std::vector<int>> coord_clusters;  // C_j: users with coordinated interference
  std::vector<PowerConstraint> power_constraints;
  RVec noise_variances;                          // sigma_k^2
  UncertaintyModel uncertainty;
  CsiMode csi_mode = CsiMode::PerfectCsi;

  int total_antennas() const;
  /// First antenna index of transmitter j in the stacked channel vector.
  int antenna_offset(int tx) const;
  bool serves(int tx, int user) const;
  bool coordinates(int tx, int user) const;
};

/// Nominal channel estimates and uncertainty shapes for one draw.
struct ChannelRealization {
  std::vector<CVec> estimates;           // h_hat_k, length N, masked by C_k
  std::vector<CMat> uncertainty_shapes;  // B_k, masked by C_k on both sides
};

/// Per-user 0/1 diagonal selection masks derived from the clusters. D_k and
/// C_k are diagonal with identity/zero blocks, so a diagonal vector is the
/// full representation; data_matrix/coord_matrix expand on demand.
struct SelectionMatrices {
  std::vector<RVec> data_masks;   // diag of D_k
  std::vector<RVec> coord_masks;  // diag of C_k
  RMat data_matrix(int user) const;
  RMat coord_matrix(int user) const;
};

/// N x N block-diagonal 0/1 matrix whose j-th block is I_{N_j} iff the user
/// belongs to transmitter j's cluster.
RMat selection_matrix(const std::vector<std::vector<int>>& clusters, const std::vector<int>& antennas,
                      int user);

SelectionMatrices selection_matrices(const Scenario& scenario);

struct PowerModel {
  enum class Kind { TotalPower, PerAntenna, PerTransmitter };
  Kind kind = Kind::TotalPower;
  double q = 1.0;
};

/// All transmitters serve and coordinate all users; spherical uncertainty of
/// squared radius xi (xi = 0 gives perfect CSI).
Scenario make_network_mimo(int num_transmitters, const std::vector<int>& antennas, int num_users,
                           const PowerModel& power, double xi);

/// One user per transmitter; D_j = {j}, C_j = everyone, per-transmitter total
/// power constraints Q_l = D_l. Uncertainty blocks are per-user,
/// per-transmitter (empty -> perfect CSI).
Scenario make_interference_channel(int num_transmitters, const std::vector<int>& antennas,
                                   double per_tx_power,
                                   const std::vector<std::vector<CMat>>& uncertainty_blocks = {});

/// Rayleigh-fading draw: entries of h_hat_{jk} are i.i.d. CN(0, gain(j,k)/N_j)
/// so that E||h_hat_{jk}||^2 = gain(j,k); entries with k not in C_j are zero.
/// Deterministic for a fixed seed.
ChannelRealization draw_channels(const Scenario& scenario, const RMat& snr_gains, std::uint64_t seed);

/// Empty iff all Scenario invariants hold; each entry names the violated
/// invariant and the offending index.
std::vector<std::string> validate(const Scenario& scenario);

}  // namespace mcbf
