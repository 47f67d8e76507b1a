// OpenMP kernels. K and K* work directly on svec coordinates: the top-left
// k×k block of svec(Ψ_i) uses the same packing as svec(Θ_p), so the Θ sums
// map entry by entry.
#include "arpdps/kernels.hpp"

#include <cmath>
#include <vector>

namespace arpdps::kernels {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

inline Index sidx(Index n, Index r, Index c) { return c * n - c * (c - 1) / 2 + (r - c); }

}  // namespace

void apply_K(const CompositeProblem& cp, const Vec& xt, Vec& yt) {
  const auto& s = cp.dims();
  const auto& arp = cp.arp();
  const Index k = s.k;
  const Index n = k + 1;
  const double rho = arp.rho;
  const double dshift = cp.d_norm2() - arp.ball.r;
  const Vec& ctr = arp.ball.center;
  yt.resize(s.dim_y);
  const Vec x = xt.head(s.d);

#pragma omp parallel
  {
    Vec t(s.theta_len);
    Vec half(k);
#pragma omp for schedule(static)
    for (Index i = 0; i < s.m; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      const double lam = xt[s.lambda_off + i];
      t.setZero();
      half.setZero();
      double cy0 = 0.0;
      for (const auto& [p, cv] : cp.c_rows()[ui]) {
        t += cv * xt.segment(s.theta_off + p * s.theta_len, s.theta_len);
        half += cv * xt.segment(s.u_off + static_cast<Index>(p) * k, k);
        cy0 += cv * xt[s.y0_off + p];
      }
      // half = ½(ρUᵀc + Aᵀx)
      half *= rho;
      half.noalias() += arp.a[ui].transpose() * x;
      half *= 0.5;
      double* out = yt.data() + i * s.block_len;
      for (Index c = 0; c < k; ++c) {
        for (Index r = c; r < k; ++r) out[sidx(n, r, c)] = -(1.0 - rho) * t[sidx(k, r, c)];
        out[sidx(n, c, c)] += lam;
        out[sidx(n, k, c)] = kSqrt2 * (-lam * ctr[c] - half[c]);
      }
      out[sidx(n, k, k)] = lam * dshift - arp.a0[ui].dot(x) - rho * cy0;
    }
  }
}

void apply_K_adjoint(const CompositeProblem& cp, const Vec& yt, Vec& xt) {
  const auto& s = cp.dims();
  const auto& arp = cp.arp();
  const Index k = s.k;
  const Index n = k + 1;
  const double rho = arp.rho;
  const double dshift = cp.d_norm2() - arp.ball.r;
  const Vec& ctr = arp.ball.center;
  xt.setZero(s.dim_x);

  // Per block: Ψ12 (unscaled) and Ψ22; λ_i directly.
  Mat psi12(k, s.m);
  Vec psi22(s.m);
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < s.m; ++i) {
    const double* in = yt.data() + i * s.block_len;
    double tr = 0.0;
    for (Index c = 0; c < k; ++c) {
      psi12(c, i) = in[sidx(n, k, c)] / kSqrt2;
      tr += in[sidx(n, c, c)];
    }
    psi22[i] = in[sidx(n, k, k)];
    xt[s.lambda_off + i] = tr - 2.0 * ctr.dot(psi12.col(i)) + dshift * psi22[i];
  }

  // Recourse parts are owned by p, so threads never write the same entry.
#pragma omp parallel for schedule(dynamic, 4)
  for (Index p = 0; p < s.q; ++p) {
    auto th = xt.segment(s.theta_off + p * s.theta_len, s.theta_len);
    auto u = xt.segment(s.u_off + p * k, k);
    double y0 = 0.0;
    for (const auto& [i, cv] : cp.c_columns()[static_cast<std::size_t>(p)]) {
      const double* in = yt.data() + static_cast<Index>(i) * s.block_len;
      y0 -= rho * cv * psi22[i];
      u.noalias() -= rho * cv * psi12.col(i);
      const double w = -(1.0 - rho) * cv;
      for (Index c = 0; c < k; ++c)
        for (Index r = c; r < k; ++r) th[sidx(k, r, c)] += w * in[sidx(n, r, c)];
    }
    xt[s.y0_off + p] = y0;
  }

  // x is shared by all blocks; only the few rows with nonzero data touch it.
  auto x = xt.head(s.d);
  for (Index i = 0; i < s.m; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    if (psi22[i] != 0.0) x.noalias() -= psi22[i] * arp.a0[ui];
    if (!arp.a[ui].isZero(0.0)) x.noalias() -= arp.a[ui] * psi12.col(i);
  }
}

void prox_G_star(const CompositeProblem& cp, Vec& yt, double sigma) {
  const auto& s = cp.dims();
#pragma omp parallel
  {
    Mat psi;
#pragma omp for schedule(static)
    for (Index i = 0; i < s.m; ++i) {
      auto seg = yt.segment(i * s.block_len, s.block_len);
      smat_into(seg, psi);
      const Mat& b = cp.offsets()[static_cast<std::size_t>(i)];
      const Mat p = project_psd(Mat(psi / sigma - b));
      psi -= sigma * (b + p);
      svec_into(psi, seg);
    }
  }
}

}  // namespace arpdps::kernels
