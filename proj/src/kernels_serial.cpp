// Single-threaded references written straight from the block formulas with
// dense matrices.
#include "arpdps/kernels.hpp"

namespace arpdps::kernels::serial {

void apply_K(const CompositeProblem& cp, const Vec& xt, Vec& yt) {
  const auto& s = cp.dims();
  const auto& arp = cp.arp();
  const Index k = s.k;
  const double rho = arp.rho;
  const Vec x = xt.head(s.d);
  const Vec y0 = xt.segment(s.y0_off, s.q);
  const Mat u = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      xt.data() + s.u_off, s.q, k);
  yt.resize(s.dim_y);
  for (Index i = 0; i < s.m; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const double lam = xt[s.lambda_off + i];
    Mat psi = Mat::Zero(k + 1, k + 1);
    Mat p11 = lam * Mat::Identity(k, k);
    for (Index p = 0; p < s.q; ++p) p11 -= (1.0 - rho) * arp.c[ui][p] * cp.theta(xt, p);
    const Vec p12 = -lam * arp.ball.center - 0.5 * (rho * u.transpose() * arp.c[ui] + arp.a[ui].transpose() * x);
    psi.topLeftCorner(k, k) = p11;
    psi.block(0, k, k, 1) = p12;
    psi.block(k, 0, 1, k) = p12.transpose();
    psi(k, k) = lam * (arp.ball.center.squaredNorm() - arp.ball.r) - arp.a0[ui].dot(x) - rho * arp.c[ui].dot(y0);
    yt.segment(i * s.block_len, s.block_len) = svec(psi);
  }
}

void apply_K_adjoint(const CompositeProblem& cp, const Vec& yt, Vec& xt) {
  const auto& s = cp.dims();
  const auto& arp = cp.arp();
  const Index k = s.k;
  const double rho = arp.rho;
  xt.setZero(s.dim_x);
  for (Index i = 0; i < s.m; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const Mat psi = cp.block(yt, i);
    const Mat p11 = psi.topLeftCorner(k, k);
    const Vec p12 = psi.block(0, k, k, 1);
    const double p22 = psi(k, k);
    xt.head(s.d) -= arp.a[ui] * p12 + arp.a0[ui] * p22;
    for (Index p = 0; p < s.q; ++p) {
      const double cv = arp.c[ui][p];
      xt[s.y0_off + p] -= rho * cv * p22;
      for (Index l = 0; l < k; ++l) xt[s.u_off + p * k + l] -= rho * cv * p12[l];
      xt.segment(s.theta_off + p * s.theta_len, s.theta_len) -= (1.0 - rho) * cv * svec(p11);
    }
    xt[s.lambda_off + i] = p11.trace() - 2.0 * arp.ball.center.dot(p12) +
                           (arp.ball.center.squaredNorm() - arp.ball.r) * p22;
  }
}

void prox_G_star(const CompositeProblem& cp, Vec& yt, double sigma) {
  const auto& s = cp.dims();
  for (Index i = 0; i < s.m; ++i) {
    const Mat psi = cp.block(yt, i);
    const Mat& b = cp.offsets()[static_cast<std::size_t>(i)];
    const Mat out = psi - sigma * project_shifted_psd(Mat(psi / sigma), b);
    yt.segment(i * s.block_len, s.block_len) = svec(out);
  }
}

}  // namespace arpdps::kernels::serial
