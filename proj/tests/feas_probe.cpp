// SPDX-License-Identifier: Apache-2.0
#include <cstdio>

#include "mcbf/feasibility.hpp"
#include "mcbf/ipm.hpp"

using namespace mcbf;

int main() {
  // Single user, single antenna, |h| = 1, sigma^2 = 1, total power 10.
  // MMSE = 1/(1+10) = 0.090909...
  Scenario s = make_network_mimo(1, {1}, 1, {PowerModel::Kind::TotalPower, 10.0}, 0.0);
  ChannelRealization r;
  r.estimates = {CVec::Ones(1)};
  r.uncertainty_shapes = {CMat::Zero(1, 1)};
  InteriorPointBackend backend;
  for (double gamma : {0.05, 0.0909, 0.0910, 0.2, 0.5, 0.99, 1.0}) {
    RVec g(1);
    g << gamma;
    const auto out = check_feasible(s, r, g, backend);
    std::printf("gamma=%.4f feasible=%d margin=% .6e", gamma, out.feasible, out.margin);
    if (out.feasible && out.strategy) {
      std::printf("  |v|^2=%.4f r=%.4f mse=%.6f", out.strategy->beamformers[0].squaredNorm(),
                  out.strategy->equalizers(0),
                  mse_nominal(r, selection_matrices(s), *out.strategy, 0, r.estimates[0], s));
    }
    std::printf("\n");
  }

  // Worst-case LMI path with B = 0 must reproduce the same boundary.
  Scenario sw = s;
  sw.csi_mode = CsiMode::WorstCase;
  std::printf("--- worst-case LMI, B = 0 ---\n");
  for (double gamma : {0.0880, 0.0909, 0.0910, 0.2, 0.99}) {
    RVec g(1);
    g << gamma;
    const auto out = check_feasible(sw, r, g, backend);
    std::printf("gamma=%.4f feasible=%d margin=% .6e\n", gamma, out.feasible, out.margin);
  }

  // Spherical uncertainty shrinks the region: worst channel |h| = 1 - sqrt(xi).
  std::printf("--- worst-case LMI, xi = 0.01 ---\n");
  Scenario su = make_network_mimo(1, {1}, 1, {PowerModel::Kind::TotalPower, 10.0}, 0.01);
  ChannelRealization ru;
  ru.estimates = {CVec::Ones(1)};
  ru.uncertainty_shapes = {CMat::Identity(1, 1) * 0.1};
  // worst |h|^2 = 0.81, MMSE = 1/(1+10*0.81) = 0.10989
  for (double gamma : {0.1050, 0.1098, 0.1100, 0.2}) {
    RVec g(1);
    g << gamma;
    const auto out = check_feasible(su, ru, g, backend);
    std::printf("gamma=%.4f feasible=%d margin=% .6e\n", gamma, out.feasible, out.margin);
    if (out.feasible) {
      const double wc = worst_case_mse(su, ru, *out.strategy, 0, backend);
      std::printf("  worst_case_mse of certificate = %.6f (target %.4f)\n", wc, gamma);
    }
  }
  return 0;
}
