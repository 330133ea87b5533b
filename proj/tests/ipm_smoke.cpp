// SPDX-License-Identifier: Apache-2.0
// Quick analytic checks of the interior-point backend.

#include <cstdio>
#include <cmath>

#include "mcbf/conic.hpp"
#include "mcbf/ipm.hpp"
#include "mcbf/rng.hpp"

using namespace mcbf;

static int failures = 0;

static void expect_near(const char* name, double got, double want, double tol) {
  const bool ok = std::abs(got - want) <= tol;
  std::printf("%-40s got % .10f want % .10f  %s\n", name, got, want, ok ? "ok" : "FAIL");
  if (!ok) ++failures;
}

int main() {
  InteriorPointBackend solver;

  {
    // LP: min c^T x s.t. x >= 0, sum x = 1  ->  min_i c_i
    ConeProgramBuilder b(3);
    b.minimize(2.0 * b.variable(0) + 0.7 * b.variable(1) + 1.3 * b.variable(2));
    for (int i = 0; i < 3; ++i) b.add_nonnegative(b.variable(i));
    b.add_equality(b.variable(0) + b.variable(1) + b.variable(2) - b.constant(1.0));
    auto sol = solver.solve(b.build());
    expect_near("lp simplex min", sol.objective, 0.7, 1e-6);
    std::printf("  status=%d iters=%d\n", static_cast<int>(sol.status), sol.iterations);
  }

  {
    // SOC: min t s.t. ||x - p|| <= t, a^T x = b0. t* = |a^T p - b0| / ||a||
    Eigen::Vector3d p(1.0, 2.0, -0.5), a(1.0, 1.0, 1.0);
    const double b0 = 0.0;
    ConeProgramBuilder b(4);  // x(3), t
    b.minimize(b.variable(3));
    std::vector<LinExpr> soc{b.variable(3)};
    for (int i = 0; i < 3; ++i) soc.push_back(b.variable(i) - b.constant(p(i)));
    b.add_second_order(soc);
    LinExpr eq(4);
    for (int i = 0; i < 3; ++i) eq += a(i) * b.variable(i);
    eq.offset -= b0;
    b.add_equality(eq);
    auto sol = solver.solve(b.build());
    expect_near("soc projection distance", sol.objective, std::abs(a.dot(p) - b0) / a.norm(), 1e-6);
    std::printf("  status=%d iters=%d\n", static_cast<int>(sol.status), sol.iterations);
  }

  {
    // SDP: min t s.t. t I - A >= 0  ->  t* = lambda_max(A)
    Rng rng(7);
    const int n = 5;
    RMat a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = rng.gaussian();
    a = RMat(0.5 * (a + a.transpose()));
    ConeProgramBuilder b(1);
    b.minimize(b.variable(0));
    std::vector<std::vector<LinExpr>> m(n, std::vector<LinExpr>(n, LinExpr(1)));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        m[i][j] = b.constant(-a(i, j));
        if (i == j) m[i][j] += b.variable(0);
      }
    b.add_semidefinite(m);
    auto sol = solver.solve(b.build());
    Eigen::SelfAdjointEigenSolver<RMat> es(a, Eigen::EigenvaluesOnly);
    expect_near("sdp lambda_max", sol.objective, es.eigenvalues().maxCoeff(), 1e-6);
    std::printf("  status=%d iters=%d\n", static_cast<int>(sol.status), sol.iterations);
  }

  {
    // Hermitian SDP: min t s.t. t I - H >= 0 for a random Hermitian H.
    Rng rng(11);
    const int n = 4;
    CMat hm(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) hm(i, j) = Complex(rng.gaussian(), rng.gaussian());
    hm = CMat(0.5 * (hm + hm.adjoint()));
    ConeProgramBuilder b(1);
    b.minimize(b.variable(0));
    std::vector<std::vector<CLinExpr>> m(n, std::vector<CLinExpr>(n, CLinExpr(1)));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) {
        m[i][j].re = b.constant(-hm(i, j).real());
        m[i][j].im = b.constant(-hm(i, j).imag());
        if (i == j) m[i][j].re += b.variable(0);
      }
    b.add_hermitian_semidefinite(m);
    auto sol = solver.solve(b.build());
    Eigen::SelfAdjointEigenSolver<CMat> es(hm, Eigen::EigenvaluesOnly);
    expect_near("hermitian sdp lambda_max", sol.objective, es.eigenvalues().maxCoeff(), 1e-6);
    std::printf("  status=%d iters=%d\n", static_cast<int>(sol.status), sol.iterations);
  }

  {
    // Mixed LP+SOC+SDP with quadratic bound: max x0 s.t. x0^2 <= 4, x0 >= 0,
    // diag(x0, 1) <= 3 I. Answer: 2.
    ConeProgramBuilder b(1);
    b.minimize(-1.0 * b.variable(0));
    b.add_nonnegative(b.variable(0));
    b.add_quadratic_bound({b.variable(0)}, b.constant(4.0));
    std::vector<std::vector<LinExpr>> m(2, std::vector<LinExpr>(2, LinExpr(1)));
    m[0][0] = b.constant(3.0) - b.variable(0);
    m[1][1] = b.constant(2.0);
    m[0][1] = b.constant(0.0);
    m[1][0] = b.constant(0.0);
    b.add_semidefinite(m);
    auto sol = solver.solve(b.build());
    expect_near("mixed quad bound", -sol.objective, 2.0, 1e-6);
    std::printf("  status=%d iters=%d\n", static_cast<int>(sol.status), sol.iterations);
  }

  {
    // Random mixed-cone stress; certify optimality through the KKT residuals
    // and the cone memberships of the returned primal/dual pair.
    int bad = 0;
    for (int trial = 0; trial < 40; ++trial) {
      Rng rng(1000 + trial);
      const int nv = 6 + (trial % 5);
      ConeProgramBuilder b(nv);
      LinExpr obj(nv);
      for (int i = 0; i < nv; ++i) obj += rng.gaussian() * b.variable(i);
      b.minimize(obj);
      // Bounded feasible set: per-variable box plus one soc, one psd block.
      for (int i = 0; i < nv; ++i) {
        b.add_nonnegative(b.constant(2.0) - b.variable(i));
        b.add_nonnegative(b.variable(i) + b.constant(2.0));
      }
      std::vector<LinExpr> soc{b.constant(3.0)};
      for (int i = 0; i < 3; ++i) soc.push_back(b.variable(i) - b.constant(0.2 * i));
      b.add_second_order(soc);
      const int sn = 3;
      std::vector<std::vector<LinExpr>> m(sn, std::vector<LinExpr>(sn, LinExpr(nv)));
      for (int i = 0; i < sn; ++i)
        for (int j = 0; j <= i; ++j) {
          LinExpr e(nv);
          for (int v = 0; v < nv; ++v) e += (0.3 * rng.gaussian()) * b.variable(v);
          if (i == j) e += b.constant(4.0);
          m[i][j] = e;
          m[j][i] = e;
        }
      b.add_semidefinite(m);
      LinExpr eq(nv);
      for (int v = 0; v < nv; ++v) eq += rng.gaussian() * b.variable(v);
      b.add_equality(eq);

      const auto prog = b.build();
      const auto sol = solver.solve(prog);
      const double pres = (prog.cone_lhs * sol.x + sol.s - prog.cone_rhs).norm();
      const double eres = prog.num_eq() ? (prog.eq_lhs * sol.x - prog.eq_rhs).norm() : 0.0;
      const double dres =
          (prog.objective + prog.eq_lhs.transpose() * sol.y + prog.cone_lhs.transpose() * sol.z).norm();
      const bool ok = sol.ok() && pres < 1e-6 && eres < 1e-6 && dres < 1e-6 &&
                      std::abs(sol.duality_gap) < 1e-5;
      if (!ok) {
        ++bad;
        std::printf("  trial %d: status=%d pres=%.2e eres=%.2e dres=%.2e gap=%.2e\n", trial,
                    static_cast<int>(sol.status), pres, eres, dres, sol.duality_gap);
      }
    }
    std::printf("%-40s bad=%d  %s\n", "random mixed-cone kkt certificates", bad, bad ? "FAIL" : "ok");
    if (bad) ++failures;
  }

  std::printf("failures: %d\n", failures);
  return failures == 0 ? 0 : 1;
}
