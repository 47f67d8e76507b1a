#include "arpdps/reformulator.hpp"

#include "arpdps/kernels.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace arpdps {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void ObjectiveAtoms::validate(Index d) const {
  require(linear.size() == d, "objective: linear part has wrong length");
  require(quadratic.size() == 0 || quadratic.size() == d, "objective: quadratic part has wrong length");
  require(lo.size() == 0 || lo.size() == d, "objective: lower bound has wrong length");
  require(hi.size() == 0 || hi.size() == d, "objective: upper bound has wrong length");
  require(linear.allFinite(), "objective: non-finite linear coefficient");
  if (quadratic.size() > 0) {
    require(quadratic.allFinite(), "objective: non-finite quadratic coefficient");
    require((quadratic.array() >= 0.0).all(), "objective: negative quadratic coefficient");
  }
  if (lo.size() > 0 && hi.size() > 0) require((lo.array() <= hi.array()).all(), "objective: lo > hi");
}

double ObjectiveAtoms::value(const Vec& x) const {
  double v = linear.dot(x);
  if (quadratic.size() > 0) v += 0.5 * (quadratic.array() * x.array().square()).sum();
  for (Index i = 0; i < x.size(); ++i) {
    if ((lo.size() > 0 && x[i] < lo[i]) || (hi.size() > 0 && x[i] > hi[i]))
      return std::numeric_limits<double>::infinity();
  }
  return v;
}

Vec ObjectiveAtoms::prox(const Vec& x, double tau) const {
  Vec z = x - tau * linear;
  if (quadratic.size() > 0) z.array() /= 1.0 + tau * quadratic.array();
  if (lo.size() > 0) z = z.cwiseMax(lo);
  if (hi.size() > 0) z = z.cwiseMin(hi);
  return z;
}

void ArpProblem::validate() const {
  require(d > 0 && q >= 0 && m > 0 && k > 0, "arp: dimensions must be positive");
  const auto um = static_cast<std::size_t>(m);
  require(a0.size() == um && a.size() == um && bvec.size() == um && c.size() == um,
          "arp: per-constraint data must have m entries");
  require(b0.size() == m, "arp: b0 must have m entries");
  for (std::size_t i = 0; i < um; ++i) {
    require(a0[i].size() == d, "arp: a0_" + std::to_string(i) + " has wrong length");
    require(a[i].rows() == d && a[i].cols() == k, "arp: A_" + std::to_string(i) + " must be d×k");
    require(bvec[i].size() == k, "arp: b_" + std::to_string(i) + " must have k entries");
    require(c[i].size() == q, "arp: c_" + std::to_string(i) + " must have q entries");
    require(a0[i].allFinite() && a[i].allFinite() && bvec[i].allFinite() && c[i].allFinite(),
            "arp: non-finite data in constraint " + std::to_string(i));
  }
  require(b0.allFinite(), "arp: non-finite b0");
  require(ball.center.size() == k && ball.center.allFinite(), "arp: ball center must be a finite k-vector");
  require(std::isfinite(ball.r) && ball.r >= 0.0, "arp: ball radius must be finite and nonnegative");
  require(box_lo.size() == d && box_hi.size() == d, "arp: box bounds must have d entries");
  require((box_lo.array() <= box_hi.array()).all(), "arp: box lo > hi");
  require(!box_lo.hasNaN() && !box_hi.hasNaN(), "arp: NaN in box");
  require(sos_set.dim == d, "arp: set D must live in R^d");
  sos_set.validate();
  f.validate(d);
  require(rho >= 0.0 && rho <= 1.0, "arp: rho must lie in [0, 1]");
}

CompositeDims composite_dims(int d, int q, int k, int m) {
  CompositeDims s;
  s.d = d;
  s.q = q;
  s.k = k;
  s.m = m;
  s.theta_len = svec_size(k);
  s.block_len = svec_size(k + 1);
  s.y0_off = d;
  s.u_off = s.y0_off + q;
  s.theta_off = s.u_off + static_cast<Index>(q) * k;
  s.lambda_off = s.theta_off + static_cast<Index>(q) * s.theta_len;
  s.dim_x = s.lambda_off + m;
  s.dim_y = static_cast<Index>(m) * s.block_len;
  s.dim_lifted = s.dim_y + 2 * s.dim_x;
  return s;
}

CompositeProblem::CompositeProblem(ArpProblem arp) : arp_(std::move(arp)) {
  arp_.validate();
  require(arp_.ball.r > 0.0, "composite form needs r > 0; solve the nominal problem for r = 0");
  dims_ = composite_dims(arp_.d, arp_.q, arp_.k, arp_.m);
  d_norm2_ = arp_.ball.center.squaredNorm();
  const Index k = arp_.k;
  b_.resize(static_cast<std::size_t>(arp_.m));
  c_cols_.assign(static_cast<std::size_t>(arp_.q), {});
  c_rows_.assign(static_cast<std::size_t>(arp_.m), {});
  for (int i = 0; i < arp_.m; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    Mat bi = Mat::Zero(k + 1, k + 1);
    bi.block(0, k, k, 1) = -0.5 * arp_.bvec[ui];
    bi.block(k, 0, 1, k) = -0.5 * arp_.bvec[ui].transpose();
    bi(k, k) = -arp_.b0[i];
    b_[ui] = bi;
    for (int p = 0; p < arp_.q; ++p) {
      const double v = arp_.c[ui][p];
      if (v != 0.0) {
        c_cols_[static_cast<std::size_t>(p)].emplace_back(i, v);
        c_rows_[ui].emplace_back(p, v);
      }
    }
  }
}

CompositeProblem build_composite(ArpProblem arp) { return CompositeProblem(std::move(arp)); }

Vec CompositeProblem::apply_K(const Vec& xt) const {
  require(xt.size() == dims_.dim_x, "apply_K: wrong input length");
  Vec out(dims_.dim_y);
  kernels::apply_K(*this, xt, out);
  return out;
}

Vec CompositeProblem::apply_K_adjoint(const Vec& yt) const {
  require(yt.size() == dims_.dim_y, "apply_K_adjoint: wrong input length");
  Vec out(dims_.dim_x);
  kernels::apply_K_adjoint(*this, yt, out);
  return out;
}

Vec CompositeProblem::apply_lifted(const Vec& xt) const {
  Vec out(dims_.dim_lifted);
  Vec ky(dims_.dim_y);
  kernels::apply_K(*this, xt, ky);
  out.head(dims_.dim_y) = ky;
  out.segment(dims_.dim_y, dims_.dim_x) = xt;
  out.tail(dims_.dim_x) = xt;
  return out;
}

Vec CompositeProblem::apply_lifted_adjoint(const Vec& yl) const {
  require(yl.size() == dims_.dim_lifted, "apply_lifted_adjoint: wrong input length");
  Vec out(dims_.dim_x);
  kernels::apply_K_adjoint(*this, yl.head(dims_.dim_y), out);
  out += yl.segment(dims_.dim_y, dims_.dim_x) + yl.tail(dims_.dim_x);
  return out;
}

Mat CompositeProblem::block(const Vec& yt, Index i) const {
  Mat out;
  smat_into(yt.segment(i * dims_.block_len, dims_.block_len), out);
  return out;
}

Mat CompositeProblem::theta(const Vec& xt, Index p) const {
  Mat out;
  smat_into(xt.segment(dims_.theta_off + p * dims_.theta_len, dims_.theta_len), out);
  return out;
}

bool lmi_feasibility(const CompositeProblem& cp, const Vec& xt, double tol) {
  const auto& s = cp.dims();
  if (xt.segment(s.lambda_off, s.m).minCoeff() < -tol) return false;
  const Vec ky = cp.apply_K(xt);
  for (Index i = 0; i < s.m; ++i) {
    const Mat diff = cp.block(ky, i) - cp.offsets()[static_cast<std::size_t>(i)];
    if (min_eigenvalue(diff) < -tol) return false;
  }
  return true;
}

double robust_slack(const ArpProblem& arp, const Vec& xt, int i, const Vec& w) {
  const auto s = composite_dims(arp.d, arp.q, arp.k, arp.m);
  require(xt.size() == s.dim_x || xt.size() == s.lambda_off, "robust_slack: wrong decision length");
  const auto ui = static_cast<std::size_t>(i);
  const Vec x = xt.head(arp.d);
  // y(w) = ρ(y0 + Uw) + (1 − ρ)(wᵀΘ_p w)_p
  double cy = 0.0;
  for (int p = 0; p < arp.q; ++p) {
    const double cp = arp.c[ui][p];
    if (cp == 0.0) continue;
    double lin = xt[s.y0_off + p];
    for (int l = 0; l < arp.k; ++l) lin += xt[s.u_off + static_cast<Index>(p) * arp.k + l] * w[l];
    Mat th;
    smat_into(xt.segment(s.theta_off + static_cast<Index>(p) * s.theta_len, s.theta_len), th);
    cy += cp * (arp.rho * lin + (1.0 - arp.rho) * w.dot(th * w));
  }
  const double bw = arp.b0[i] + arp.bvec[ui].dot(w);
  const double ax = arp.a0[ui].dot(x) + (arp.a[ui].transpose() * x).dot(w);
  return bw - ax - cy;
}

RobustMargin robust_feasibility_sample(const ArpProblem& arp, const Vec& xt, int n_samples, std::uint64_t seed) {
  require(n_samples >= 0, "robust_feasibility_sample: negative sample count");
  const int k = arp.k;
  const double rad = std::sqrt(arp.ball.r);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif;
  RobustMargin out;
  out.margin = std::numeric_limits<double>::infinity();
  auto visit = [&](const Vec& w) {
    for (int i = 0; i < arp.m; ++i) {
      const double sl = robust_slack(arp, xt, i, w);
      if (sl < out.margin) {
        out.margin = sl;
        out.worst_constraint = i;
        out.worst_w = w;
      }
    }
  };
  visit(arp.ball.center);
  for (int t = 0; t < n_samples; ++t) {
    Vec dir(k);
    for (int l = 0; l < k; ++l) dir[l] = gauss(rng);
    const double nrm = dir.norm();
    if (nrm == 0.0) continue;
    dir /= nrm;
    const double scale = (t % 2 == 0) ? rad * std::pow(unif(rng), 1.0 / k) : rad;
    visit(arp.ball.center + scale * dir);
  }
  return out;
}

}  // namespace arpdps
