#include "arpdps/pdps.hpp"

#include "arpdps/kernels.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace arpdps {

std::string to_string(PdpsStatus s) {
  switch (s) {
    case PdpsStatus::converged: return "converged";
    case PdpsStatus::max_iters: return "max_iters";
    case PdpsStatus::inner_failure: return "inner_failure";
  }
  return "unknown";
}

namespace {

double stacked_norm(const SplittingProblem& prob, const PdpsConfig& cfg) {
  Index total = 0;
  for (const auto& b : prob.blocks) total += b.dim;
  auto apply = [&](const Vec& x) {
    Vec out(total);
    Index off = 0;
    for (const auto& b : prob.blocks) {
      b.apply(x, out.segment(off, b.dim));
      off += b.dim;
    }
    return out;
  };
  auto adjoint = [&](const Vec& y) {
    Vec acc = Vec::Zero(prob.primal_dim);
    Index off = 0;
    for (const auto& b : prob.blocks) {
      b.adjoint_add(y.segment(off, b.dim), acc);
      off += b.dim;
    }
    return acc;
  };
  return power_method_norm(apply, adjoint, prob.primal_dim, cfg.power_iters, cfg.seed);
}

}  // namespace

SolveReport run_pdps(const SplittingProblem& prob, const PdpsConfig& cfg) {
  if (!(cfg.sigma > 0.0)) throw std::invalid_argument("pdps: sigma must be positive");
  if (!(cfg.eps > 0.0)) throw std::invalid_argument("pdps: eps must be positive");
  if (cfg.max_iters < 1) throw std::invalid_argument("pdps: max_iters must be at least 1");
  const auto t0 = std::chrono::steady_clock::now();

  SolveReport rep;
  const double nrm = prob.norm ? *prob.norm : stacked_norm(prob, cfg);
  rep.norm_estimate = nrm * cfg.norm_inflation;
  rep.sigma = cfg.sigma;
  if (cfg.tau) {
    if (!(*cfg.tau > 0.0)) throw std::invalid_argument("pdps: tau must be positive");
    if (*cfg.tau * cfg.sigma * rep.norm_estimate * rep.norm_estimate >= 4.0 / 3.0)
      throw std::invalid_argument("pdps: step sizes violate tau*sigma*|L|^2 < 4/3");
    rep.tau = *cfg.tau;
  } else {
    rep.tau = 1.3 / (cfg.sigma * std::max(rep.norm_estimate * rep.norm_estimate, 1e-12));
  }
  const double tau = rep.tau;
  const double sigma = cfg.sigma;

  Index ydim = 0;
  std::vector<Index> offs;
  for (const auto& b : prob.blocks) {
    offs.push_back(ydim);
    ydim += b.dim;
  }
  Vec x = Vec::Zero(prob.primal_dim);
  Vec xbar = x;
  Vec y = Vec::Zero(ydim);
  Vec ynew(ydim);
  Vec acc(prob.primal_dim);
  Vec xnew(prob.primal_dim);
  Vec lx;
  rep.status = PdpsStatus::max_iters;

  for (int it = 1; it <= cfg.max_iters; ++it) {
    const bool check = cfg.debug_checks && it % 100 == 0;
    for (std::size_t j = 0; j < prob.blocks.size(); ++j) {
      const auto& b = prob.blocks[j];
      auto seg = ynew.segment(offs[j], b.dim);
      b.apply(xbar, seg);
      seg = y.segment(offs[j], b.dim) + sigma * seg;
      const Vec before = check ? Vec(seg) : Vec();
      std::string err;
      if (!b.prox_conj(seg, sigma, err, rep.inner_iterations)) {
        rep.status = PdpsStatus::inner_failure;
        rep.message = b.name + ": " + err;
        rep.iterations = it;
        rep.x = x;
        rep.y = y;
        rep.objective = prob.objective(x);
        rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return rep;
      }
      if (check && b.moreau_residual) {
        const double r = b.moreau_residual(before, Vec(seg), sigma);
        if (r > 1e-6 * (1.0 + before.norm()))
          throw std::logic_error("pdps: Moreau identity violated in block " + b.name + " (residual " +
                                 std::to_string(r) + ")");
      }
    }
    acc.setZero();
    for (std::size_t j = 0; j < prob.blocks.size(); ++j)
      prob.blocks[j].adjoint_add(ynew.segment(offs[j], prob.blocks[j].dim), acc);
    xnew = x - tau * acc;
    prob.prox_f(xnew, tau);
    xbar = xnew + cfg.theta * (xnew - x);

    rep.rel_dx = (xnew - x).norm() / std::max(xnew.norm(), 1e-12);
    rep.rel_dy = (ynew - y).norm() / std::max(ynew.norm(), 1e-12);
    if (cfg.record_history) rep.history.emplace_back(rep.rel_dx, rep.rel_dy);
    x.swap(xnew);
    y.swap(ynew);
    rep.iterations = it;
    if (!x.allFinite() || !y.allFinite()) {
      rep.status = PdpsStatus::inner_failure;
      rep.message = "non-finite iterate";
      break;
    }
    if (it > 2 && std::max(rep.rel_dx, rep.rel_dy) <= cfg.eps) {
      rep.status = PdpsStatus::converged;
      break;
    }
  }
  rep.x = x;
  rep.y = y;
  rep.objective = prob.objective(x);
  rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

Vec prox_F(const CompositeProblem& cp, const Vec& xt, double tau) {
  const auto& s = cp.dims();
  Vec out = xt;
  out.head(s.d) = cp.arp().f.prox(xt.head(s.d), tau);
  out.segment(s.lambda_off, s.m) = out.segment(s.lambda_off, s.m).cwiseMax(0.0);
  return out;
}

Vec prox_E_star(const CompositeProblem& cp, const Vec& z, double sigma) {
  const auto& s = cp.dims();
  const auto& arp = cp.arp();
  Vec out = Vec::Zero(z.size());
  const Vec zx = z.head(s.d);
  out.head(s.d) = zx - sigma * project_box(Vec(zx / sigma), arp.box_lo, arp.box_hi);
  return out;
}

Vec prox_G_star(const CompositeProblem& cp, const Vec& yt, double sigma) {
  Vec out = yt;
  kernels::prox_G_star(cp, out, sigma);
  return out;
}

SplittingProblem make_splitting(const CompositeProblem& cp, std::shared_ptr<const SdpBackend> backend,
                                const PdpsConfig& cfg) {
  if (!backend) backend = default_backend();
  const auto& s = cp.dims();
  const CompositeProblem* pc = &cp;
  SplittingProblem sp;
  sp.primal_dim = s.dim_x;
  sp.prox_f = [pc](Vec& x, double tau) { x = prox_F(*pc, x, tau); };
  sp.objective = [pc](const Vec& x) { return pc->arp().f.value(x.head(pc->dims().d)); };

  DualBlock g;
  g.name = "G";
  g.dim = s.dim_y;
  g.apply = [pc](const Vec& x, Eigen::Ref<Vec> out) {
    Vec tmp;
    kernels::apply_K(*pc, x, tmp);
    out = tmp;
  };
  g.adjoint_add = [pc](const Eigen::Ref<const Vec>& y, Vec& acc) {
    Vec tmp;
    kernels::apply_K_adjoint(*pc, Vec(y), tmp);
    acc += tmp;
  };
  g.prox_conj = [pc](Eigen::Ref<Vec> y, double sigma, std::string&, long&) {
    Vec tmp = y;
    kernels::prox_G_star(*pc, tmp, sigma);
    y = tmp;
    return true;
  };
  g.moreau_residual = [pc](const Vec& in, const Vec& out, double sigma) {
    double r = 0.0;
    for (Index i = 0; i < pc->dims().m; ++i) {
      const SymMat psi = SymMat::from_dense(pc->block(in, i));
      const SymMat b = SymMat::from_dense(pc->offsets()[static_cast<std::size_t>(i)]);
      const SymMat proj = project_shifted_psd((1.0 / sigma) * psi, b);
      r = std::max(r, (pc->block(out, i) + sigma * proj.dense() - psi.dense()).norm());
    }
    return r;
  };
  sp.blocks.push_back(std::move(g));

  DualBlock e;
  e.name = "E";
  e.dim = s.dim_x;
  e.apply = [](const Vec& x, Eigen::Ref<Vec> out) { out = x; };
  e.adjoint_add = [](const Eigen::Ref<const Vec>& y, Vec& acc) { acc += y; };
  e.prox_conj = [pc](Eigen::Ref<Vec> y, double sigma, std::string&, long&) {
    y = prox_E_star(*pc, Vec(y), sigma);
    return true;
  };
  e.moreau_residual = [pc](const Vec& in, const Vec& out, double sigma) {
    const auto& arp = pc->arp();
    Vec proj = in / sigma;
    const Index d = pc->dims().d;
    for (Index i = 0; i < d; ++i) proj[i] = std::min(std::max(proj[i], arp.box_lo[i]), arp.box_hi[i]);
    return (out + sigma * proj - in).norm();
  };
  sp.blocks.push_back(std::move(e));

  auto projector = std::make_shared<SetProjector>(cp.arp().sos_set, backend, cfg.inner_tol, cfg.warm_start_inner);
  DualBlock h;
  h.name = "H";
  h.dim = s.dim_x;
  h.apply = [](const Vec& x, Eigen::Ref<Vec> out) { out = x; };
  h.adjoint_add = [](const Eigen::Ref<const Vec>& y, Vec& acc) { acc += y; };
  h.prox_conj = [pc, projector](Eigen::Ref<Vec> y, double sigma, std::string& err, long& inner) {
    const Index d = pc->dims().d;
    const Vec zx = y.head(d);
    y.setZero();
    if (pc->arp().sos_set.gs.empty()) return true;
    const ProjectionResult pr = projector->project(Vec(zx / sigma));
    inner += pr.inner_iterations;
    if (pr.status != SdpStatus::optimal && pr.status != SdpStatus::inaccurate) {
      std::ostringstream os;
      os.precision(17);
      os << "projection onto D failed at (" << (zx / sigma).transpose() << "): " << to_string(pr.status) << " "
         << pr.message;
      err = os.str();
      return false;
    }
    y.head(d) = zx - sigma * pr.point;
    return true;
  };
  h.moreau_residual = [pc](const Vec& in, const Vec& out, double sigma) {
    // P_D(in/σ) = (in − out)/σ must lie in D.
    const Index d = pc->dims().d;
    const Vec p = (in.head(d) - out.head(d)) / sigma;
    double r = out.tail(out.size() - d).norm();
    for (const auto& gj : pc->arp().sos_set.gs) r = std::max(r, gj.eval(p) - 1e-6);
    return std::max(r, 0.0);
  };
  sp.blocks.push_back(std::move(h));
  return sp;
}

SolveReport solve(const CompositeProblem& cp, const PdpsConfig& cfg, std::shared_ptr<const SdpBackend> backend) {
  const SplittingProblem sp = make_splitting(cp, std::move(backend), cfg);
  return run_pdps(sp, cfg);
}

}  // namespace arpdps
