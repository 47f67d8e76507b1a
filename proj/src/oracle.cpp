// Reference projection: min ½‖x − v‖² s.t. g_j(x) ≤ 0, solved without SDPs.
#include "arpdps/projections.hpp"

#include <algorithm>
#include <cmath>

namespace arpdps {

namespace {

Mat fd_hessian(const ConstraintHandle& g, const Vec& x, double h) {
  const Index n = x.size();
  Mat hess(n, n);
  for (Index i = 0; i < n; ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    hess.col(i) = (g.gradient(xp) - g.gradient(xm)) / (2.0 * h);
  }
  return 0.5 * (hess + hess.transpose());
}

struct AugLag {
  const Vec& v;
  const std::vector<ConstraintHandle>& gs;
  const Vec& lam;
  double mu;

  double value(const Vec& x) const {
    double s = 0.5 * (x - v).squaredNorm();
    for (std::size_t j = 0; j < gs.size(); ++j) {
      const double t = std::max(0.0, lam[static_cast<Index>(j)] + mu * gs[j].value(x));
      s += (t * t - lam[static_cast<Index>(j)] * lam[static_cast<Index>(j)]) / (2.0 * mu);
    }
    return s;
  }
  Vec grad(const Vec& x) const {
    Vec gr = x - v;
    for (std::size_t j = 0; j < gs.size(); ++j) {
      const double t = std::max(0.0, lam[static_cast<Index>(j)] + mu * gs[j].value(x));
      if (t > 0.0) gr += t * gs[j].gradient(x);
    }
    return gr;
  }
};

double kkt_residual(const Vec& x, const Vec& v, const std::vector<ConstraintHandle>& gs, const Vec& lam) {
  Vec st = x - v;
  double feas = 0.0;
  double comp = 0.0;
  for (std::size_t j = 0; j < gs.size(); ++j) {
    const double gv = gs[j].value(x);
    st += lam[static_cast<Index>(j)] * gs[j].gradient(x);
    feas = std::max(feas, gv);
    comp = std::max(comp, std::abs(lam[static_cast<Index>(j)] * gv));
  }
  return std::max({st.norm(), feas, comp});
}

// Newton on x − v + Σ_A λ_j ∇g_j = 0, g_A(x) = 0.
bool polish(const Vec& v, const std::vector<ConstraintHandle>& gs, const OracleConfig& cfg, Vec& x, Vec& lam) {
  const Index n = x.size();
  std::vector<int> act;
  for (std::size_t j = 0; j < gs.size(); ++j)
    if (lam[static_cast<Index>(j)] > 1e-12 || gs[j].value(x) > -1e-8) act.push_back(static_cast<int>(j));
  for (int round = 0; round < 4; ++round) {
    const auto na = static_cast<Index>(act.size());
    Vec xa = x;
    Vec la(na);
    for (Index a = 0; a < na; ++a) la[a] = lam[act[static_cast<std::size_t>(a)]];
    for (int it = 0; it < 50; ++it) {
      Mat jac = Mat::Zero(n + na, n + na);
      Vec res(n + na);
      jac.topLeftCorner(n, n).setIdentity();
      res.head(n) = xa - v;
      for (Index a = 0; a < na; ++a) {
        const auto& g = gs[static_cast<std::size_t>(act[static_cast<std::size_t>(a)])];
        const Vec gr = g.gradient(xa);
        res.head(n) += la[a] * gr;
        res[n + a] = g.value(xa);
        jac.topLeftCorner(n, n) += la[a] * fd_hessian(g, xa, cfg.fd_step);
        jac.block(0, n + a, n, 1) = gr;
        jac.block(n + a, 0, 1, n) = gr.transpose();
      }
      if (res.norm() < 1e-15 * (1.0 + v.norm())) break;
      const Vec step = jac.fullPivLu().solve(-res);
      if (!step.allFinite()) return false;
      xa += step.head(n);
      la += step.tail(na);
      if (step.norm() < 1e-16 * (1.0 + xa.norm())) break;
    }
    // Drop constraints whose multiplier turned negative and retry.
    std::vector<int> keep;
    for (Index a = 0; a < na; ++a)
      if (la[a] >= -1e-12) keep.push_back(act[static_cast<std::size_t>(a)]);
    if (static_cast<Index>(keep.size()) == na) {
      Vec lam_new = Vec::Zero(lam.size());
      for (Index a = 0; a < na; ++a) lam_new[act[static_cast<std::size_t>(a)]] = std::max(0.0, la[a]);
      if (kkt_residual(xa, v, gs, lam_new) <= kkt_residual(x, v, gs, lam) + 1e-14) {
        x = xa;
        lam = lam_new;
      }
      return true;
    }
    act = keep;
  }
  return false;
}

}  // namespace

OracleResult oracle_project(const Vec& v, const std::vector<ConstraintHandle>& constraints, const OracleConfig& cfg) {
  const Index n = v.size();
  Vec x = v;
  Vec lam = Vec::Zero(static_cast<Index>(constraints.size()));
  double mu = 10.0;
  OracleResult out;

  for (int outer = 0; outer < cfg.max_outer; ++outer) {
    const AugLag al{v, constraints, lam, mu};
    // Damped Newton on the augmented Lagrangian; Hessian by differencing the gradient.
    for (int it = 0; it < cfg.max_inner; ++it) {
      const Vec gr = al.grad(x);
      if (gr.norm() < 1e-13 * (1.0 + v.norm())) break;
      Mat hess(n, n);
      const double h = cfg.fd_step;
      for (Index i = 0; i < n; ++i) {
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        hess.col(i) = (al.grad(xp) - al.grad(xm)) / (2.0 * h);
      }
      hess = (0.5 * (hess + hess.transpose())).eval();
      const double lmin = min_eigenvalue(hess);
      if (lmin < 1e-8) hess.diagonal().array() += 1e-8 - lmin;
      Vec dir = hess.llt().solve(-gr);
      if (!dir.allFinite() || dir.dot(gr) >= 0.0) dir = -gr;
      const double f0 = al.value(x);
      double t = 1.0;
      while (t > 1e-14 && al.value(x + t * dir) > f0 + 1e-4 * t * gr.dot(dir)) t *= 0.5;
      if (t <= 1e-14) break;
      x += t * dir;
      if ((t * dir).norm() < 1e-15 * (1.0 + x.norm())) break;
    }
    for (std::size_t j = 0; j < constraints.size(); ++j)
      lam[static_cast<Index>(j)] = std::max(0.0, lam[static_cast<Index>(j)] + mu * constraints[j].value(x));
    if (kkt_residual(x, v, constraints, lam) < cfg.tol) break;
    mu = std::min(mu * 2.0, 1e6);
  }

  polish(v, constraints, cfg, x, lam);
  out.point = x;
  out.kkt_residual = kkt_residual(x, v, constraints, lam);
  out.converged = out.kkt_residual < std::max(cfg.tol, 1e-9);
  return out;
}

std::vector<ConstraintHandle> handles_from(const std::vector<Polynomial>& gs) {
  std::vector<ConstraintHandle> hs;
  for (const auto& g : gs) {
    hs.push_back({[g](const Vec& x) { return g.eval(x); }, [g](const Vec& x) { return g.gradient(x); }});
  }
  return hs;
}

}  // namespace arpdps
