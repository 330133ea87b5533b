// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "mcbf/conic.hpp"

namespace mcbf {

struct IpmOptions {
  int max_iterations = 100;
  double feastol = 1e-8;
  double abstol = 1e-8;
  double reltol = 1e-9;
  double static_regularization = 1e-11;
  bool verbose = false;
};

/// Dense primal-dual interior-point solver over products of non-negative,
/// second-order and semidefinite cones. Nesterov-Todd scaling with a Mehrotra
/// predictor-corrector step; the KKT system is reduced to a quasi-definite
/// saddle system and solved by dense LU.
class InteriorPointBackend : public ConicBackend {
 public:
  InteriorPointBackend() = default;
  explicit InteriorPointBackend(const IpmOptions& options) : options_(options) {}

  ConicSolution solve(const ConeProgram& program) const override;
  double tolerance() const override { return 1e-6; }

  const IpmOptions& options() const { return options_; }

 private:
  IpmOptions options_;
};

}  // namespace mcbf
