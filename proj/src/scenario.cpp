// SPDX-License-Identifier: Apache-2.0

#include "mcbf/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mcbf/rng.hpp"

namespace mcbf {

int Scenario::total_antennas() const {
  return std::accumulate(antennas.begin(), antennas.end(), 0);
}

int Scenario::antenna_offset(int tx) const {
  return std::accumulate(antennas.begin(), antennas.begin() + tx, 0);
}

bool Scenario::serves(int tx, int user) const {
  const auto& set = data_clusters.at(tx);
  return std::find(set.begin(), set.end(), user) != set.end();
}

bool Scenario::coordinates(int tx, int user) const {
  const auto& set = coord_clusters.at(tx);
  return std::find(set.begin(), set.end(), user) != set.end();
}

RMat SelectionMatrices::data_matrix(int user) const {
  return RMat(data_masks.at(user).asDiagonal());
}

RMat SelectionMatrices::coord_matrix(int user) const {
  return RMat(coord_masks.at(user).asDiagonal());
}

RMat selection_matrix(const std::vector<std::vector<int>>& clusters, const std::vector<int>& antennas,
                      int user) {
  if (clusters.size() != antennas.size()) {
    throw std::invalid_argument("selection_matrix: clusters/antennas length mismatch");
  }
  if (user < 0) throw std::invalid_argument("selection_matrix: negative user index");
  const int total = std::accumulate(antennas.begin(), antennas.end(), 0);
  RVec diag = RVec::Zero(total);
  int offset = 0;
  for (std::size_t j = 0; j < antennas.size(); ++j) {
    const auto& set = clusters[j];
    if (std::find(set.begin(), set.end(), user) != set.end()) {
      diag.segment(offset, antennas[j]).setOnes();
    }
    offset += antennas[j];
  }
  return RMat(diag.asDiagonal());
}

SelectionMatrices selection_matrices(const Scenario& s) {
  SelectionMatrices out;
  const int n = s.total_antennas();
  out.data_masks.resize(s.num_users);
  out.coord_masks.resize(s.num_users);
  for (int k = 0; k < s.num_users; ++k) {
    RVec d = RVec::Zero(n), c = RVec::Zero(n);
    for (int j = 0; j < s.num_transmitters; ++j) {
      const int off = s.antenna_offset(j);
      if (s.serves(j, k)) d.segment(off, s.antennas[j]).setOnes();
      if (s.coordinates(j, k)) c.segment(off, s.antennas[j]).setOnes();
    }
    out.data_masks[k] = d;
    out.coord_masks[k] = c;
  }
  return out;
}

namespace {

std::vector<int> all_users(int num_users) {
  std::vector<int> v(num_users);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

}  // namespace

Scenario make_network_mimo(int num_transmitters, const std::vector<int>& antennas, int num_users,
                           const PowerModel& power, double xi) {
  if (num_transmitters <= 0 || num_users <= 0 || static_cast<int>(antennas.size()) != num_transmitters) {
    throw std::invalid_argument("make_network_mimo: inconsistent dimensions");
  }
  for (int nj : antennas) {
    if (nj <= 0) throw std::invalid_argument("make_network_mimo: antennas must be positive");
  }
  if (xi < 0.0) throw std::invalid_argument("make_network_mimo: xi must be non-negative");
  Scenario s;
  s.num_transmitters = num_transmitters;
  s.antennas = antennas;
  s.num_users = num_users;
  s.data_clusters.assign(num_transmitters, all_users(num_users));
  s.coord_clusters = s.data_clusters;
  const int n = s.total_antennas();
  switch (power.kind) {
    case PowerModel::Kind::TotalPower:
      s.power_constraints.push_back({CMat::Identity(n, n), power.q});
      break;
    case PowerModel::Kind::PerAntenna:
      for (int i = 0; i < n; ++i) {
        CMat q = CMat::Zero(n, n);
        q(i, i) = 1.0;
        s.power_constraints.push_back({q, power.q});
      }
      break;
    case PowerModel::Kind::PerTransmitter:
      for (int j = 0; j < num_transmitters; ++j) {
        CMat q = CMat::Zero(n, n);
        const int off = s.antenna_offset(j);
        q.block(off, off, antennas[j], antennas[j]) = CMat::Identity(antennas[j], antennas[j]);
        s.power_constraints.push_back({q, power.q});
      }
      break;
  }
  s.noise_variances = RVec::Ones(num_users);
  s.uncertainty.kind = UncertaintyModel::Kind::Sphere;
  s.uncertainty.xi = xi;
  s.csi_mode = xi == 0.0 ? CsiMode::PerfectCsi : CsiMode::WorstCase;
  return s;
}

Scenario make_interference_channel(int num_transmitters, const std::vector<int>& antennas,
                                   double per_tx_power,
                                   const std::vector<std::vector<CMat>>& uncertainty_blocks) {
  if (num_transmitters <= 0 || static_cast<int>(antennas.size()) != num_transmitters) {
    throw std::invalid_argument("make_interference_channel: inconsistent dimensions");
  }
  Scenario s;
  s.num_transmitters = num_transmitters;
  s.antennas = antennas;
  s.num_users = num_transmitters;  // one user per transmitter
  s.data_clusters.resize(num_transmitters);
  for (int j = 0; j < num_transmitters; ++j) s.data_clusters[j] = {j};
  s.coord_clusters.assign(num_transmitters, all_users(s.num_users));
  const int n = s.total_antennas();
  for (int j = 0; j < num_transmitters; ++j) {
    CMat q = CMat::Zero(n, n);
    const int off = s.antenna_offset(j);
    q.block(off, off, antennas[j], antennas[j]) = CMat::Identity(antennas[j], antennas[j]);
    s.power_constraints.push_back({q, per_tx_power});
  }
  s.noise_variances = RVec::Ones(s.num_users);
  if (uncertainty_blocks.empty()) {
    s.uncertainty.kind = UncertaintyModel::Kind::Sphere;
    s.uncertainty.xi = 0.0;
    s.csi_mode = CsiMode::PerfectCsi;
    return s;
  }
  if (static_cast<int>(uncertainty_blocks.size()) != s.num_users) {
    throw std::invalid_argument("make_interference_channel: one block list per user expected");
  }
  s.uncertainty.kind = UncertaintyModel::Kind::Explicit;
  bool all_zero = true;
  for (int k = 0; k < s.num_users; ++k) {
    const auto& blocks = uncertainty_blocks[k];
    if (static_cast<int>(blocks.size()) != num_transmitters) {
      throw std::invalid_argument("make_interference_channel: one block per transmitter expected");
    }
    CMat b = CMat::Zero(n, n);
    for (int j = 0; j < num_transmitters; ++j) {
      if (blocks[j].rows() != antennas[j] || blocks[j].cols() != antennas[j]) {
        throw std::invalid_argument("make_interference_channel: block dimension mismatch");
      }
      const int off = s.antenna_offset(j);
      b.block(off, off, antennas[j], antennas[j]) = blocks[j];
      if (blocks[j].norm() > 0.0) all_zero = false;
    }
    s.uncertainty.shapes.push_back(b);
  }
  s.csi_mode = all_zero ? CsiMode::PerfectCsi : CsiMode::WorstCase;
  return s;
}

ChannelRealization draw_channels(const Scenario& s, const RMat& snr_gains, std::uint64_t seed) {
  if (snr_gains.rows() != s.num_transmitters || snr_gains.cols() != s.num_users) {
    throw std::invalid_argument("draw_channels: snr_gains must be K_t x K_r");
  }
  if ((snr_gains.array() < 0.0).any()) throw std::invalid_argument("draw_channels: gains must be >= 0");
  Rng rng(seed);
  const int n = s.total_antennas();
  const SelectionMatrices sel = selection_matrices(s);
  ChannelRealization r;
  r.estimates.resize(s.num_users);
  r.uncertainty_shapes.resize(s.num_users);
  for (int k = 0; k < s.num_users; ++k) {
    CVec h = CVec::Zero(n);
    for (int j = 0; j < s.num_transmitters; ++j) {
      const int off = s.antenna_offset(j);
      const double per_entry = snr_gains(j, k) / s.antennas[j];
      for (int i = 0; i < s.antennas[j]; ++i) {
        const Complex g = rng.complex_gaussian(per_entry);
        if (s.coordinates(j, k)) h(off + i) = g;  // draw regardless to keep streams aligned
      }
    }
    r.estimates[k] = h;
    CMat b;
    if (s.csi_mode == CsiMode::PerfectCsi) {
      b = CMat::Zero(n, n);
    } else if (s.uncertainty.kind == UncertaintyModel::Kind::Sphere) {
      b = std::sqrt(s.uncertainty.xi) * CMat::Identity(n, n);
    } else {
      b = s.uncertainty.shapes.at(k);
    }
    const RVec& mask = sel.coord_masks[k];
    b = mask.asDiagonal() * b * mask.asDiagonal();
    r.uncertainty_shapes[k] = b;
  }
  return r;
}

std::vector<std::string> validate(const Scenario& s) {
  std::vector<std::string> violations;
  const int n = s.total_antennas();
  if (s.num_transmitters <= 0) violations.push_back("num_transmitters must be positive");
  if (s.num_users <= 0) violations.push_back("num_users must be positive");
  if (static_cast<int>(s.antennas.size()) != s.num_transmitters) {
    violations.push_back("antennas list length differs from num_transmitters");
  }
  for (std::size_t j = 0; j < s.antennas.size(); ++j) {
    if (s.antennas[j] <= 0) violations.push_back("antennas[" + std::to_string(j) + "] must be positive");
  }
  if (static_cast<int>(s.data_clusters.size()) != s.num_transmitters ||
      static_cast<int>(s.coord_clusters.size()) != s.num_transmitters) {
    violations.push_back("cluster lists must have one entry per transmitter");
    return violations;
  }
  for (int j = 0; j < s.num_transmitters; ++j) {
    for (int k : s.data_clusters[j]) {
      if (k < 0 || k >= s.num_users) {
        violations.push_back("data cluster of transmitter " + std::to_string(j) + " references invalid user");
      } else if (!s.coordinates(j, k)) {
        violations.push_back("D_j not a subset of C_j at transmitter " + std::to_string(j));
      }
    }
    for (int k : s.coord_clusters[j]) {
      if (k < 0 || k >= s.num_users) {
        violations.push_back("coord cluster of transmitter " + std::to_string(j) + " references invalid user");
      }
    }
  }
  if (s.noise_variances.size() != s.num_users) {
    violations.push_back("noise_variances must have one entry per user");
  } else if ((s.noise_variances.array() <= 0.0).any()) {
    violations.push_back("noise variances must be positive");
  }
  if (s.power_constraints.empty()) {
    violations.push_back("at least one power constraint required");
    return violations;
  }
  CMat sum = CMat::Zero(n, n);
  for (std::size_t l = 0; l < s.power_constraints.size(); ++l) {
    const auto& pc = s.power_constraints[l];
    if (pc.q_matrix.rows() != n || pc.q_matrix.cols() != n) {
      violations.push_back("Q_" + std::to_string(l) + " has wrong dimension");
      continue;
    }
    if (pc.limit <= 0.0) violations.push_back("q_" + std::to_string(l) + " must be positive");
    if ((pc.q_matrix - pc.q_matrix.adjoint()).norm() > 1e-9 * std::max(1.0, pc.q_matrix.norm())) {
      violations.push_back("Q_" + std::to_string(l) + " is not Hermitian");
      continue;
    }
    Eigen::SelfAdjointEigenSolver<CMat> es(pc.q_matrix, Eigen::EigenvaluesOnly);
    const double lmax = std::max(1.0, es.eigenvalues().maxCoeff());
    if (es.eigenvalues().minCoeff() < -1e-9 * lmax) {
      violations.push_back("Q_" + std::to_string(l) + " is not positive semi-definite");
    }
    sum += pc.q_matrix;
  }
  Eigen::SelfAdjointEigenSolver<CMat> es(sum, Eigen::EigenvaluesOnly);
  const double lmax = std::max(1.0, es.eigenvalues().maxCoeff());
  if (es.eigenvalues().minCoeff() <= 1e-9 * lmax) {
    violations.push_back("sum of Q_l not positive definite");
  }
  if (s.uncertainty.kind == UncertaintyModel::Kind::Explicit &&
      static_cast<int>(s.uncertainty.shapes.size()) != s.num_users) {
    violations.push_back("explicit uncertainty requires one shape per user");
  }
  if (s.uncertainty.kind == UncertaintyModel::Kind::Sphere && s.uncertainty.xi < 0.0) {
    violations.push_back("uncertainty radius must be non-negative");
  }
  return violations;
}

}  // namespace mcbf
