// SPDX-License-Identifier: Apache-2.0

#include "mcbf/ipm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

namespace mcbf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct SocView {
  int offset;
  int dim;
};
struct PsdView {
  int offset;
  int n;
};

struct Layout {
  int orth_offset = 0;
  int orth_len = 0;
  std::vector<SocView> socs;
  std::vector<PsdView> psds;
  int total = 0;
  double degree = 0.0;  // l + #socs + sum(psd n)
};

Layout make_layout(const ConeProgram& p) {
  Layout lay;
  int off = 0;
  for (const auto& cone : p.cones) {
    switch (cone.kind) {
      case ConeKind::NonNegative:
        lay.orth_offset = off;
        lay.orth_len += cone.dim;
        lay.degree += cone.dim;
        break;
      case ConeKind::SecondOrder:
        lay.socs.push_back({off, cone.dim});
        lay.degree += 1.0;
        break;
      case ConeKind::SemiDefinite:
        lay.psds.push_back({off, cone.dim});
        lay.degree += cone.dim;
        break;
    }
    off += cone.length();
  }
  lay.total = off;
  return lay;
}

double jnrm(const Eigen::Ref<const RVec>& u) {
  const double d = u(0) * u(0) - u.tail(u.size() - 1).squaredNorm();
  return d > 0.0 ? std::sqrt(d) : 0.0;
}

// Cholesky factor with escalating jitter; the iterates are interior so this
// only fires close to convergence.
bool robust_llt(const RMat& m, RMat* l) {
  RMat work = m;
  double jitter = 0.0;
  const double scale = std::max(1.0, m.trace() / m.rows());
  for (int attempt = 0; attempt < 6; ++attempt) {
    Eigen::LLT<RMat> llt(work);
    if (llt.info() == Eigen::Success) {
      *l = llt.matrixL();
      return true;
    }
    jitter = jitter == 0.0 ? 1e-14 * scale : jitter * 100.0;
    work = m + jitter * RMat::Identity(m.rows(), m.cols());
  }
  return false;
}

/// Nesterov-Todd scaling state for the full cone product.
struct Scaling {
  RVec orth_w;  // per-entry sqrt(s/z)
  struct Soc {
    double beta;
    RVec v;  // W = beta * (2 v v^T - J), v^T J v = 1
  };
  std::vector<Soc> socs;
  struct Psd {
    RMat r, rinv;
    RVec lam;  // diagonal of the scaled point
  };
  std::vector<Psd> psds;
  RVec lambda;  // scaled point, flat
};

RVec soc_apply_h(const RVec& v, double beta, const Eigen::Ref<const RVec>& u) {
  // beta * (2 v (v^T u) - J u)
  RVec out = 2.0 * v.dot(u) * v;
  out(0) -= u(0);
  out.tail(u.size() - 1) += u.tail(u.size() - 1);
  return beta * out;
}

RVec soc_apply_hinv(const RVec& v, double beta, const Eigen::Ref<const RVec>& u) {
  // W^{-1} = (1/beta) J H(v) J
  RVec ju = u;
  ju.tail(u.size() - 1) *= -1.0;
  RVec hju = 2.0 * v.dot(ju) * v;
  hju(0) -= ju(0);
  hju.tail(u.size() - 1) += ju.tail(u.size() - 1);
  hju.tail(u.size() - 1) *= -1.0;
  return hju / beta;
}

enum class Side { W, WT, Winv, WinvT };

// Applies the scaling (or its transpose/inverse) block-wise to a flat vector.
RVec apply_scaling(const Scaling& sc, const Layout& lay, Side side, const RVec& u) {
  RVec out(u.size());
  if (lay.orth_len > 0) {
    const auto seg = u.segment(lay.orth_offset, lay.orth_len);
    if (side == Side::W || side == Side::WT) {
      out.segment(lay.orth_offset, lay.orth_len) = sc.orth_w.array() * seg.array();
    } else {
      out.segment(lay.orth_offset, lay.orth_len) = seg.array() / sc.orth_w.array();
    }
  }
  for (std::size_t i = 0; i < lay.socs.size(); ++i) {
    const auto& view = lay.socs[i];
    const auto& s = sc.socs[i];
    const auto seg = u.segment(view.offset, view.dim);
    out.segment(view.offset, view.dim) = (side == Side::W || side == Side::WT)
                                             ? soc_apply_h(s.v, s.beta, seg)
                                             : soc_apply_hinv(s.v, s.beta, seg);
  }
  for (std::size_t i = 0; i < lay.psds.size(); ++i) {
    const auto& view = lay.psds[i];
    const auto& ps = sc.psds[i];
    const RMat m = smat(u.segment(view.offset, svec_length(view.n)), view.n);
    RMat res;
    switch (side) {
      case Side::W:
        res = ps.r.transpose() * m * ps.r;
        break;
      case Side::WT:
        res = ps.r * m * ps.r.transpose();
        break;
      case Side::Winv:
        res = ps.rinv.transpose() * m * ps.rinv;
        break;
      case Side::WinvT:
        res = ps.rinv * m * ps.rinv.transpose();
        break;
    }
    out.segment(view.offset, svec_length(view.n)) = svec(res);
  }
  return out;
}

bool compute_scaling(const Layout& lay, const RVec& s, const RVec& z, Scaling* sc) {
  sc->socs.clear();
  sc->psds.clear();
  if (lay.orth_len > 0) {
    const auto ss = s.segment(lay.orth_offset, lay.orth_len).array();
    const auto zz = z.segment(lay.orth_offset, lay.orth_len).array();
    if ((ss <= 0.0).any() || (zz <= 0.0).any()) return false;
    sc->orth_w = (ss / zz).sqrt().matrix();
  } else {
    sc->orth_w.resize(0);
  }
  for (const auto& view : lay.socs) {
    const RVec sk = s.segment(view.offset, view.dim);
    const RVec zk = z.segment(view.offset, view.dim);
    const double rho = jnrm(sk), zeta = jnrm(zk);
    if (rho <= 0.0 || zeta <= 0.0) return false;
    const RVec sbar = sk / rho;
    RVec jzbar = zk / zeta;
    jzbar.tail(view.dim - 1) *= -1.0;
    // plain inner product of the normalized points
    const double c = sbar.dot(zk / zeta);
    const double g = std::sqrt((1.0 + c) / 2.0);
    RVec vq = (sbar + jzbar) / (2.0 * g);
    // Jordan square root of vq (unit Jordan determinant).
    RVec v = vq;
    v(0) += 1.0;
    v /= std::sqrt(2.0 * (vq(0) + 1.0));
    sc->socs.push_back({std::sqrt(rho / zeta), v});
  }
  for (const auto& view : lay.psds) {
    const RMat sm = smat(s.segment(view.offset, svec_length(view.n)), view.n);
    const RMat zm = smat(z.segment(view.offset, svec_length(view.n)), view.n);
    RMat l1, l2;
    if (!robust_llt(sm, &l1) || !robust_llt(zm, &l2)) return false;
    Eigen::JacobiSVD<RMat> svd(l2.transpose() * l1, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RVec lam = svd.singularValues();
    if (lam.minCoeff() <= 0.0) return false;
    const RVec lam_isqrt = lam.array().rsqrt().matrix();
    Scaling::Psd ps;
    ps.r = l1 * svd.matrixV() * lam_isqrt.asDiagonal();
    ps.rinv = lam_isqrt.asDiagonal() * svd.matrixU().transpose() * l2.transpose();
    ps.lam = lam;
    sc->psds.push_back(std::move(ps));
  }
  // Scaled point lambda = W z (= W^{-T} s).
  sc->lambda = apply_scaling(*sc, lay, Side::W, z);
  return true;
}

// Jordan product x o y per cone.
RVec jordan_product(const Layout& lay, const RVec& x, const RVec& y) {
  RVec out(x.size());
  if (lay.orth_len > 0) {
    out.segment(lay.orth_offset, lay.orth_len) =
        x.segment(lay.orth_offset, lay.orth_len).array() * y.segment(lay.orth_offset, lay.orth_len).array();
  }
  for (const auto& view : lay.socs) {
    const auto xs = x.segment(view.offset, view.dim);
    const auto ys = y.segment(view.offset, view.dim);
    out(view.offset) = xs.dot(ys);
    out.segment(view.offset + 1, view.dim - 1) =
        xs(0) * ys.tail(view.dim - 1) + ys(0) * xs.tail(view.dim - 1);
  }
  for (const auto& view : lay.psds) {
    const int len = svec_length(view.n);
    const RMat xm = smat(x.segment(view.offset, len), view.n);
    const RMat ym = smat(y.segment(view.offset, len), view.n);
    out.segment(view.offset, len) = svec(0.5 * (xm * ym + ym * xm));
  }
  return out;
}

// Solves lambda o out = u. The PSD blocks rely on the scaled point being
// diagonal, which holds for NT scaling.
RVec jordan_divide_lambda(const Layout& lay, const Scaling& sc, const RVec& u) {
  RVec out(u.size());
  const RVec& lam = sc.lambda;
  if (lay.orth_len > 0) {
    out.segment(lay.orth_offset, lay.orth_len) =
        u.segment(lay.orth_offset, lay.orth_len).array() / lam.segment(lay.orth_offset, lay.orth_len).array();
  }
  for (const auto& view : lay.socs) {
    const auto l = lam.segment(view.offset, view.dim);
    const auto us = u.segment(view.offset, view.dim);
    const double det = l(0) * l(0) - l.tail(view.dim - 1).squaredNorm();
    const double x0 = (l(0) * us(0) - l.tail(view.dim - 1).dot(us.tail(view.dim - 1))) / det;
    out(view.offset) = x0;
    out.segment(view.offset + 1, view.dim - 1) =
        (us.tail(view.dim - 1) - x0 * l.tail(view.dim - 1)) / l(0);
  }
  for (std::size_t i = 0; i < lay.psds.size(); ++i) {
    const auto& view = lay.psds[i];
    const RVec& d = sc.psds[i].lam;
    const int len = svec_length(view.n);
    RMat um = smat(u.segment(view.offset, len), view.n);
    for (int c = 0; c < view.n; ++c) {
      for (int r = 0; r < view.n; ++r) um(r, c) *= 2.0 / (d(r) + d(c));
    }
    out.segment(view.offset, len) = svec(um);
  }
  return out;
}

RVec cone_identity(const Layout& lay) {
  RVec e = RVec::Zero(lay.total);
  if (lay.orth_len > 0) e.segment(lay.orth_offset, lay.orth_len).setOnes();
  for (const auto& view : lay.socs) e(view.offset) = 1.0;
  for (const auto& view : lay.psds) {
    for (int j = 0, idx = view.offset; j < view.n; ++j) {
      e(idx) = 1.0;
      idx += view.n - j;
    }
  }
  return e;
}

// Smallest cone eigenvalue of a flat vector (used for the initial shift).
double cone_min_eig(const Layout& lay, const RVec& u) {
  double m = kInf;
  if (lay.orth_len > 0) m = std::min(m, u.segment(lay.orth_offset, lay.orth_len).minCoeff());
  for (const auto& view : lay.socs) {
    m = std::min(m, u(view.offset) - u.segment(view.offset + 1, view.dim - 1).norm());
  }
  for (const auto& view : lay.psds) {
    Eigen::SelfAdjointEigenSolver<RMat> es(smat(u.segment(view.offset, svec_length(view.n)), view.n),
                                           Eigen::EigenvaluesOnly);
    m = std::min(m, es.eigenvalues().minCoeff());
  }
  return m;
}

// Maximum step to the cone boundary from the scaled point along d.
double max_step_scaled(const Layout& lay, const Scaling& sc, const RVec& d) {
  double alpha = kInf;
  const RVec& lam = sc.lambda;
  if (lay.orth_len > 0) {
    for (int i = 0; i < lay.orth_len; ++i) {
      const double di = d(lay.orth_offset + i);
      if (di < 0.0) alpha = std::min(alpha, -lam(lay.orth_offset + i) / di);
    }
  }
  for (const auto& view : lay.socs) {
    const auto l = lam.segment(view.offset, view.dim);
    const auto ds = d.segment(view.offset, view.dim);
    // First boundary crossing of the concave map a -> mineig(l + a*d).
    const double c2 = ds(0) * ds(0) - ds.tail(view.dim - 1).squaredNorm();
    const double c1 = l(0) * ds(0) - l.tail(view.dim - 1).dot(ds.tail(view.dim - 1));
    const double c0 = l(0) * l(0) - l.tail(view.dim - 1).squaredNorm();
    double best = kInf;
    auto consider = [&](double root) {
      if (root > 0.0 && l(0) + root * ds(0) >= 0.0) best = std::min(best, root);
    };
    if (std::abs(c2) < 1e-300) {
      if (c1 < 0.0) consider(-c0 / (2.0 * c1));
    } else {
      const double disc = c1 * c1 - c2 * c0;
      if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        consider((-c1 - sq) / c2);
        consider((-c1 + sq) / c2);
      }
    }
    if (ds(0) < 0.0) best = std::min(best, -l(0) / ds(0));
    alpha = std::min(alpha, best);
  }
  for (std::size_t i = 0; i < lay.psds.size(); ++i) {
    const auto& view = lay.psds[i];
    const RVec isq = sc.psds[i].lam.array().rsqrt().matrix();
    RMat m = smat(d.segment(view.offset, svec_length(view.n)), view.n);
    m = isq.asDiagonal() * m * isq.asDiagonal();
    Eigen::SelfAdjointEigenSolver<RMat> es(m, Eigen::EigenvaluesOnly);
    const double nu = es.eigenvalues().minCoeff();
    if (nu < 0.0) alpha = std::min(alpha, -1.0 / nu);
  }
  return alpha;
}

struct KktSolver {
  // LU of [[H + dI, A^T], [A, -dI]] with H = Gt^T Gt.
  Eigen::PartialPivLU<RMat> lu;
  int n = 0, p = 0;

  bool factor(const RMat& gt, const RMat& a, double reg) {
    n = static_cast<int>(gt.cols());
    p = static_cast<int>(a.rows());
    RMat kkt = RMat::Zero(n + p, n + p);
    kkt.topLeftCorner(n, n).selfadjointView<Eigen::Lower>().rankUpdate(gt.transpose());
    kkt.topLeftCorner(n, n) = kkt.topLeftCorner(n, n).selfadjointView<Eigen::Lower>();
    kkt.topLeftCorner(n, n).diagonal().array() += reg;
    if (p > 0) {
      kkt.topRightCorner(n, p) = a.transpose();
      kkt.bottomLeftCorner(p, n) = a;
      kkt.bottomRightCorner(p, p).diagonal().array() -= reg;
    }
    lu.compute(kkt);
    return kkt.allFinite();
  }

  // Solves H dx + A^T dy = bx, A dx = by.
  bool solve(const RVec& bx, const RVec& by, RVec* dx, RVec* dy) const {
    RVec rhs(n + p);
    rhs.head(n) = bx;
    rhs.tail(p) = by;
    const RVec sol = lu.solve(rhs);
    if (!sol.allFinite()) return false;
    *dx = sol.head(n);
    *dy = sol.tail(p);
    return true;
  }
};

}  // namespace

ConicSolution InteriorPointBackend::solve(const ConeProgram& prog) const {
  const int n = prog.num_vars();
  const int p = prog.num_eq();
  const Layout lay = make_layout(prog);
  if (lay.total != prog.cone_rows()) throw std::invalid_argument("ipm: cone layout mismatch");

  const RMat& g = prog.cone_lhs;
  const RMat& a = prog.eq_lhs;
  const RVec& h = prog.cone_rhs;
  const RVec& b = prog.eq_rhs;
  const RVec& c = prog.objective;

  ConicSolution best;
  best.status = ConicSolution::Status::NumericalFailure;
  double best_score = kInf;

  const RVec e = cone_identity(lay);

  // Initial point from a least-squares solve at W = I, shifted into the cone.
  RVec x, y, s, z;
  {
    KktSolver kkt0;
    if (!kkt0.factor(g, a, std::max(options_.static_regularization, 1e-12))) {
      return best;
    }
    RVec dy_tmp;
    if (!kkt0.solve(g.transpose() * h, b, &x, &dy_tmp)) return best;
    s = h - g * x;
    const double ms = cone_min_eig(lay, s);
    if (ms <= 1e-8 * (1.0 + s.norm())) s += (1.0 - ms) * e;
    RVec u;
    if (!kkt0.solve(c, RVec::Zero(p), &u, &y)) return best;
    y = -y;
    z = -g * u;
    const double mz = cone_min_eig(lay, z);
    if (mz <= 1e-8 * (1.0 + z.norm())) z += (1.0 - mz) * e;
  }

  const double bnorm = std::max(1.0, b.size() > 0 ? b.norm() : 0.0);
  const double hnorm = std::max(1.0, h.norm());
  const double cnorm = std::max(1.0, c.norm());

  Scaling sc;
  KktSolver kkt;
  int iter = 0;
  for (; iter < options_.max_iterations; ++iter) {
    const RVec rx = c + (p > 0 ? RVec(a.transpose() * y) : RVec::Zero(n)) + g.transpose() * z;
    const RVec ry = p > 0 ? RVec(a * x - b) : RVec();
    const RVec rz = g * x + s - h;
    const double gap = s.dot(z);
    const double pcost = c.dot(x);
    const double dcost = -(p > 0 ? b.dot(y) : 0.0) - h.dot(z);
    const double pres = std::max(p > 0 ? ry.norm() / bnorm : 0.0, rz.norm() / hnorm);
    const double dres = rx.norm() / cnorm;
    const double relgap = gap / std::max({1.0, std::abs(pcost), std::abs(dcost)});

    const double score = std::max({pres, dres, relgap});
    if (score < best_score) {
      best_score = score;
      best.x = x;
      best.s = s;
      best.z = z;
      best.y = y;
      best.objective = pcost;
      best.primal_residual = pres;
      best.dual_residual = dres;
      best.duality_gap = gap;
    }
    if (options_.verbose) {
      std::printf("iter %2d  pcost % .6e  dcost % .6e  gap %.2e  pres %.2e  dres %.2e\n", iter, pcost,
                  dcost, gap, pres, dres);
    }
    if (pres <= options_.feastol && dres <= options_.feastol &&
        (gap <= options_.abstol || relgap <= options_.reltol)) {
      best.status = ConicSolution::Status::Optimal;
      best.iterations = iter;
      return best;
    }

    if (!compute_scaling(lay, s, z, &sc)) break;
    const double mu = gap / lay.degree;

    // Scaled cone matrix and KKT factorization (shared by both directions).
    RMat gt(lay.total, n);
    for (int j = 0; j < n; ++j) {
      if (g.col(j).isZero(0.0)) {
        gt.col(j).setZero();
      } else {
        gt.col(j) = apply_scaling(sc, lay, Side::WinvT, g.col(j));
      }
    }
    if (!kkt.factor(gt, a, options_.static_regularization)) break;

    const RVec wrz = apply_scaling(sc, lay, Side::WinvT, rz);
    const RVec lam_sq = jordan_product(lay, sc.lambda, sc.lambda);

    auto direction = [&](const RVec& bs, RVec* dx, RVec* dy, RVec* dst, RVec* dzt) -> bool {
      const RVec bx = -(rx + gt.transpose() * (bs + wrz));
      const RVec by = p > 0 ? RVec(-ry) : RVec();
      if (!kkt.solve(bx, by, dx, dy)) return false;
      *dzt = gt * (*dx) + bs + wrz;
      *dst = bs - *dzt;
      return true;
    };

    // Predictor.
    RVec dx, dy, dst, dzt;
    if (!direction(-sc.lambda, &dx, &dy, &dst, &dzt)) break;
    const double alpha_aff =
        std::min({1.0, max_step_scaled(lay, sc, dst), max_step_scaled(lay, sc, dzt)});
    double sigma = 0.0;
    {
      const RVec s_aff = sc.lambda + alpha_aff * dst;
      const RVec z_aff = sc.lambda + alpha_aff * dzt;
      const double mu_aff = s_aff.dot(z_aff) / lay.degree;
      sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);
    }

    // Corrector.
    const RVec corr = jordan_product(lay, dst, dzt);
    const RVec bs = jordan_divide_lambda(lay, sc, sigma * mu * e - lam_sq - corr);
    if (!direction(bs, &dx, &dy, &dst, &dzt)) break;

    double alpha = std::min({1.0 / 0.99, max_step_scaled(lay, sc, dst), max_step_scaled(lay, sc, dzt)});
    alpha *= 0.99;
    alpha = std::min(alpha, 1.0);
    if (!(alpha > 1e-10)) break;

    x += alpha * dx;
    if (p > 0) y += alpha * dy;
    s += alpha * apply_scaling(sc, lay, Side::WT, dst);
    z += alpha * apply_scaling(sc, lay, Side::Winv, dzt);
    if (!x.allFinite() || !s.allFinite() || !z.allFinite()) break;
  }

  best.iterations = iter;
  // Near-solutions are still usable by callers that check residuals.
  best.status = iter >= options_.max_iterations ? ConicSolution::Status::IterationLimit
                                                : ConicSolution::Status::NumericalFailure;
  if (best_score <= 1e2 * options_.feastol && best.duality_gap <= 1e3 * options_.abstol) {
    best.status = ConicSolution::Status::Optimal;
  }
  return best;
}

}  // namespace mcbf
