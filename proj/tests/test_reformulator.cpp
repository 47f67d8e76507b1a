#include "arpdps/kernels.hpp"
#include "arpdps/lotsizing.hpp"
#include "arpdps/reformulator.hpp"

#include "arp_fixtures.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace arpdps;
using suite::gaussian;

namespace {

double adjoint_defect(const CompositeProblem& cp, std::mt19937_64& rng) {
  const auto& s = cp.dims();
  const Vec x = gaussian(s.dim_x, rng);
  const Vec y = gaussian(s.dim_y, rng);
  Vec kx, ky;
  kernels::apply_K(cp, x, kx);
  kernels::apply_K_adjoint(cp, y, ky);
  const double lhs = kx.dot(y);
  const double rhs = x.dot(ky);
  return std::abs(lhs - rhs) / std::max(1.0, kx.norm() * y.norm());
}

std::vector<CompositeProblem> instances() {
  std::vector<CompositeProblem> out;
  out.emplace_back(build_lotsizing(fixed_linear_instance(2)));
  out.emplace_back(build_lotsizing(randomized_instance(3, 11)));
  out.emplace_back(suite::random_arp(5));
  out.emplace_back(suite::random_arp(6, 4, 3, 3, 5));
  return out;
}

}  // namespace

TEST(Reformulator, DimensionCounts) {
  EXPECT_EQ(composite_dims(4, 4, 2, 7).total(), 147);
  EXPECT_EQ(composite_dims(6, 16, 4, 21).total(), 1116);
  EXPECT_EQ(composite_dims(8, 36, 6, 43).total(), 4381);
  const auto s = composite_dims(1, 1, 1, 1);
  EXPECT_EQ(s.dim_x, 5);
  EXPECT_EQ(s.dim_y, 3);
  EXPECT_EQ(s.dim_lifted, 13);

  const CompositeProblem cp(build_lotsizing(fixed_linear_instance(2)));
  EXPECT_EQ(cp.dims().dim_x, 35);
  EXPECT_EQ(cp.dims().dim_lifted, 112);
  EXPECT_EQ(cp.dims().total(), 147);
}

TEST(Reformulator, RadiusMustBePositive) {
  auto p = suite::one_dim_arp();
  p.ball.r = 0.0;
  EXPECT_THROW(CompositeProblem{p}, std::invalid_argument);
  p.ball.r = -1.0;
  EXPECT_THROW(CompositeProblem{p}, std::invalid_argument);
}

TEST(Reformulator, ShapeErrors) {
  auto p = suite::random_arp(1);
  p.c[1] = Vec::Zero(5);
  EXPECT_THROW(CompositeProblem{p}, std::invalid_argument);
  auto p2 = suite::random_arp(1);
  p2.rho = 1.5;
  EXPECT_THROW(CompositeProblem{p2}, std::invalid_argument);
  const CompositeProblem cp(suite::random_arp(1));
  EXPECT_THROW(cp.apply_K(Vec::Zero(3)), std::invalid_argument);
}

TEST(Reformulator, Offsets) {
  const auto arp = suite::random_arp(2);
  const CompositeProblem cp(arp);
  for (int i = 0; i < arp.m; ++i) {
    const Mat& b = cp.offsets()[static_cast<std::size_t>(i)];
    EXPECT_LE(b.topLeftCorner(arp.k, arp.k).norm(), 0.0);
    EXPECT_LE((b.topRightCorner(arp.k, 1) + 0.5 * arp.bvec[static_cast<std::size_t>(i)]).norm(), 1e-15);
    EXPECT_LE((b.bottomLeftCorner(1, arp.k).transpose() + 0.5 * arp.bvec[static_cast<std::size_t>(i)]).norm(), 1e-15);
    EXPECT_DOUBLE_EQ(b(arp.k, arp.k), -arp.b0[i]);
  }
}

TEST(Reformulator, ZeroAndLambdaBlocks) {
  const auto arp = suite::random_arp(3);
  const CompositeProblem cp(arp);
  const auto& s = cp.dims();
  EXPECT_LE(cp.apply_K(Vec::Zero(s.dim_x)).norm(), 0.0);

  Vec x = Vec::Zero(s.dim_x);
  x[s.lambda_off] = 1.0;
  const Vec y = cp.apply_K(x);
  Mat want = Mat::Zero(arp.k + 1, arp.k + 1);
  want.topLeftCorner(arp.k, arp.k).setIdentity();
  want.topRightCorner(arp.k, 1) = -arp.ball.center;
  want.bottomLeftCorner(1, arp.k) = -arp.ball.center.transpose();
  want(arp.k, arp.k) = arp.ball.center.squaredNorm() - arp.ball.r;
  EXPECT_LE((cp.block(y, 0) - want).norm(), 1e-14);
  for (Index i = 1; i < arp.m; ++i) EXPECT_LE(cp.block(y, i).norm(), 0.0);
}

TEST(Reformulator, BlockFormulaOnRandomPoint) {
  // Ψ_i written out densely from the data.
  const auto arp = suite::random_arp(4);
  const CompositeProblem cp(arp);
  const auto& s = cp.dims();
  std::mt19937_64 rng(4);
  const Vec xt = gaussian(s.dim_x, rng);
  const Vec y = cp.apply_K(xt);
  const Vec x = xt.head(s.d);
  const Vec y0 = xt.segment(s.y0_off, s.q);
  Mat u(s.q, s.k);
  for (Index p = 0; p < s.q; ++p)
    for (Index j = 0; j < s.k; ++j) u(p, j) = xt[s.u_off + p * s.k + j];
  for (Index i = 0; i < s.m; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const double lam = xt[s.lambda_off + i];
    const Vec& c = arp.c[ui];
    Mat th = Mat::Zero(s.k, s.k);
    for (Index p = 0; p < s.q; ++p) th += c[p] * cp.theta(xt, p);
    Mat want(s.k + 1, s.k + 1);
    want.topLeftCorner(s.k, s.k) = lam * Mat::Identity(s.k, s.k) - (1.0 - arp.rho) * th;
    const Vec off = -lam * arp.ball.center - 0.5 * (arp.rho * u.transpose() * c + arp.a[ui].transpose() * x);
    want.topRightCorner(s.k, 1) = off;
    want.bottomLeftCorner(1, s.k) = off.transpose();
    want(s.k, s.k) = lam * (arp.ball.center.squaredNorm() - arp.ball.r) - arp.a0[ui].dot(x) - arp.rho * c.dot(y0);
    EXPECT_LE((cp.block(y, i) - want).norm(), 1e-12) << "block " << i;
  }
}

TEST(Reformulator, AdjointIdentity) {
  std::mt19937_64 rng(17);
  for (const auto& cp : instances()) {
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) worst = std::max(worst, adjoint_defect(cp, rng));
    EXPECT_LE(worst, 1e-10);
  }
}

TEST(Reformulator, LiftedAdjointIdentity) {
  std::mt19937_64 rng(18);
  for (const auto& cp : instances()) {
    const auto& s = cp.dims();
    for (int t = 0; t < 50; ++t) {
      const Vec x = gaussian(s.dim_x, rng);
      const Vec y = gaussian(s.dim_lifted, rng);
      const Vec kx = cp.apply_lifted(x);
      ASSERT_EQ(kx.size(), s.dim_lifted);
      EXPECT_NEAR(kx.dot(y), x.dot(cp.apply_lifted_adjoint(y)), 1e-10 * std::max(1.0, kx.norm() * y.norm()));
      EXPECT_LE((kx.segment(s.dim_y, s.dim_x) - x).norm(), 0.0);
      EXPECT_LE((kx.tail(s.dim_x) - x).norm(), 0.0);
    }
  }
}

TEST(Reformulator, Linearity) {
  std::mt19937_64 rng(19);
  const CompositeProblem cp(suite::random_arp(9));
  const auto& s = cp.dims();
  for (int t = 0; t < 20; ++t) {
    const Vec a = gaussian(s.dim_x, rng);
    const Vec b = gaussian(s.dim_x, rng);
    const Vec lhs = cp.apply_K(Vec(2.5 * a - 0.75 * b));
    const Vec rhs = 2.5 * cp.apply_K(a) - 0.75 * cp.apply_K(b);
    EXPECT_LE((lhs - rhs).norm(), 1e-12 * (1.0 + rhs.norm()));
  }
}

TEST(Reformulator, ParallelKernelsMatchSerial) {
  std::mt19937_64 rng(20);
  std::vector<CompositeProblem> cps = instances();
  cps.emplace_back(build_lotsizing(fixed_linear_instance(4)));
  for (const auto& cp : cps) {
    const auto& s = cp.dims();
    for (int t = 0; t < 10; ++t) {
      const Vec x = gaussian(s.dim_x, rng);
      const Vec y = gaussian(s.dim_y, rng);
      Vec a, b;
      kernels::apply_K(cp, x, a);
      kernels::serial::apply_K(cp, x, b);
      EXPECT_LE((a - b).norm(), 1e-12 * (1.0 + b.norm()));
      EXPECT_LE((a - cp.apply_K(x)).norm(), 1e-12 * (1.0 + b.norm()));
      kernels::apply_K_adjoint(cp, y, a);
      kernels::serial::apply_K_adjoint(cp, y, b);
      EXPECT_LE((a - b).norm(), 1e-12 * (1.0 + b.norm()));
      a = y;
      b = y;
      kernels::prox_G_star(cp, a, 0.5);
      kernels::serial::prox_G_star(cp, b, 0.5);
      EXPECT_LE((a - b).norm(), 1e-10 * (1.0 + b.norm()));
    }
  }
}

TEST(Reformulator, LmiInfeasiblePointViolates) {
  // x = 0.5 breaks x ≤ 1 + w at w = −1; no multiplier can certify it.
  const auto arp = suite::one_dim_arp();
  const CompositeProblem cp(arp);
  const auto& s = cp.dims();
  for (double lam : {0.0, 0.25, 0.5, 0.75, 1.0, 2.0}) {
    Vec xt = Vec::Zero(s.dim_x);
    xt[0] = 0.5;
    xt[s.lambda_off] = lam;
    EXPECT_FALSE(lmi_feasibility(cp, xt, 1e-4)) << lam;
  }
  Vec xt = Vec::Zero(s.dim_x);
  xt[0] = 0.5;
  const auto m = robust_feasibility_sample(arp, xt, 10000, 1);
  EXPECT_LT(m.margin, -0.4);
  EXPECT_EQ(m.worst_constraint, 0);
  EXPECT_LT(m.worst_w[0], -0.9);
}

TEST(Reformulator, LmiFeasiblePointIsRobust) {
  // x = −0.5 with λ = 0.75: Ψ − B = [[0.75, 0.5], [0.5, 0.75]] ⪰ 0.
  const auto arp = suite::one_dim_arp();
  const CompositeProblem cp(arp);
  const auto& s = cp.dims();
  Vec xt = Vec::Zero(s.dim_x);
  xt[0] = -0.5;
  xt[s.lambda_off] = 0.75;
  ASSERT_TRUE(lmi_feasibility(cp, xt, 1e-12));
  const auto m = robust_feasibility_sample(arp, xt, 10000, 2);
  EXPECT_GE(m.margin, 0.5 - 1e-12);
}

TEST(Reformulator, SlemmaSoundOnRandomCertificates) {
  // Points made LMI-feasible by raising b0 until the Schur complement of every
  // Ψ_i − B_i is positive; the sampled robust margin must then be nonnegative.
  std::mt19937_64 rng(21);
  int certified = 0;
  for (int t = 0; t < 10; ++t) {
    auto arp = suite::random_arp(100 + static_cast<std::uint64_t>(t));
    const auto s0 = composite_dims(arp.d, arp.q, arp.k, arp.m);
    Vec xt = 0.3 * gaussian(s0.dim_x, rng);
    xt.tail(arp.m).setConstant(3.0);
    const CompositeProblem probe(arp);
    const Vec y = probe.apply_K(xt);
    bool ok = true;
    for (Index i = 0; i < arp.m; ++i) {
      const Mat diff = probe.block(y, i) - probe.offsets()[static_cast<std::size_t>(i)];
      const Mat tl = diff.topLeftCorner(arp.k, arp.k);
      if (min_eigenvalue(tl) <= 0.1) {
        ok = false;
        break;
      }
      const Vec off = diff.topRightCorner(arp.k, 1);
      const double need = off.dot(tl.llt().solve(off)) - diff(arp.k, arp.k);
      arp.b0[i] += std::max(need, 0.0) + 0.1;
    }
    if (!ok) continue;
    const CompositeProblem cp(arp);
    ASSERT_TRUE(lmi_feasibility(cp, xt, 1e-9)) << "trial " << t;
    ++certified;
    const auto m = robust_feasibility_sample(arp, xt, 10000, 3 + static_cast<std::uint64_t>(t));
    EXPECT_GE(m.margin, -1e-9) << "trial " << t;
  }
  EXPECT_GE(certified, 5);
}

TEST(Reformulator, RobustSlackMatchesDirectRule) {
  const auto arp = suite::random_arp(7);
  const auto s = composite_dims(arp.d, arp.q, arp.k, arp.m);
  std::mt19937_64 rng(7);
  const Vec xt = gaussian(s.dim_x, rng);
  const CompositeProblem cp(arp);
  for (int t = 0; t < 20; ++t) {
    const Vec w = gaussian(arp.k, rng);
    Vec yw(arp.q);
    for (Index p = 0; p < arp.q; ++p) {
      double lin = xt[s.y0_off + p];
      for (Index j = 0; j < arp.k; ++j) lin += xt[s.u_off + p * arp.k + j] * w[j];
      yw[p] = arp.rho * lin + (1.0 - arp.rho) * w.dot(cp.theta(xt, p) * w);
    }
    for (int i = 0; i < arp.m; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      const Vec x = xt.head(arp.d);
      const double want = arp.b0[i] + arp.bvec[ui].dot(w) - (arp.a0[ui] + arp.a[ui] * w).dot(x) - arp.c[ui].dot(yw);
      EXPECT_NEAR(robust_slack(arp, xt, i, w), want, 1e-12 * (1.0 + std::abs(want)));
      EXPECT_NEAR(robust_slack(arp, Vec(xt.head(s.lambda_off)), i, w), want, 1e-12 * (1.0 + std::abs(want)));
    }
  }
}
