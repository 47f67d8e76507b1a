#include "arpdps/linalg.hpp"

#include "psd_oracle.hpp"

#include <gtest/gtest.h>

#include <limits>
#include <random>

using namespace arpdps;

namespace {

Mat random_sym(Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Mat a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j <= i; ++j) a(i, j) = a(j, i) = g(rng);
  return a;
}

}  // namespace

TEST(Linalg, SvecIsometry) {
  Mat a(3, 3), b(3, 3);
  a << 1, 2, 3, 2, 5, 6, 3, 6, 9;
  b << 2, -1, 0, -1, 4, 1, 0, 1, -3;
  EXPECT_NEAR(svec(a).dot(svec(b)), (a * b).trace(), 1e-12);
  EXPECT_NEAR((smat(svec(a)).dense() - a).norm(), 0.0, 1e-12);
}

TEST(Linalg, SvecRandomPairs) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 100; ++t) {
    const Index n = 1 + t % 6;
    const Mat a = random_sym(n, rng);
    const Mat b = random_sym(n, rng);
    EXPECT_NEAR(svec(a).dot(svec(b)), (a * b).trace(), 1e-12 * (1.0 + a.norm() * b.norm()));
    EXPECT_NEAR(frobenius_inner(SymMat::from_dense(a), SymMat::from_dense(b)), (a * b).trace(), 1e-12 * (1.0 + a.norm() * b.norm()));
    EXPECT_EQ(svec(a).size(), svec_size(n));
    EXPECT_EQ(svec_dim(svec_size(n)), n);
  }
  EXPECT_THROW(svec_dim(4), std::invalid_argument);
}

TEST(Linalg, SymEigSmall) {
  Mat d = Mat::Zero(2, 2);
  d.diagonal() << 1.0, 3.0;
  auto e = sym_eig(d);
  EXPECT_NEAR(e.values[0], 3.0, 1e-14);
  EXPECT_NEAR(e.values[1], 1.0, 1e-14);
  Mat s(2, 2);
  s << 0, 1, 1, 0;
  e = sym_eig(s);
  EXPECT_NEAR(e.values[0], 1.0, 1e-14);
  EXPECT_NEAR(e.values[1], -1.0, 1e-14);
}

TEST(Linalg, SymEigReconstruction) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 20; ++t) {
    const Mat a = random_sym(5, rng);
    const auto e = sym_eig(a);
    EXPECT_LE((e.vectors * e.values.asDiagonal() * e.vectors.transpose() - a).norm(), 1e-10);
    EXPECT_LE((e.vectors * e.vectors.transpose() - Mat::Identity(5, 5)).norm(), 1e-10 * 5);
    for (Index i = 1; i < 5; ++i) EXPECT_GE(e.values[i - 1], e.values[i]);
  }
  Mat bad = Mat::Identity(2, 2);
  bad(0, 1) = bad(1, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(sym_eig(bad), std::invalid_argument);
}

TEST(Linalg, ProjectPsdExamples) {
  Mat d = Mat::Zero(2, 2);
  d.diagonal() << 1.0, -1.0;
  Mat want = Mat::Zero(2, 2);
  want(0, 0) = 1.0;
  EXPECT_LE((project_psd(d) - want).norm(), 1e-14);
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const Mat l = random_sym(4, rng);
    const Mat psd = l * l;
    EXPECT_LE((project_psd(psd) - psd).norm(), 1e-12 * (1.0 + psd.norm()));
  }
}

TEST(Linalg, ProjectPsdMatchesBackend) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 10; ++t) {
    const Mat s = random_sym(3, rng);
    const auto oracle = suite::backend_shifted_psd(s, Mat::Zero(3, 3));
    ASSERT_TRUE(oracle.has_value());
    EXPECT_LE((project_psd(s) - *oracle).norm(), 1e-6);
  }
}

TEST(Linalg, ShiftedPsdMatchesBackend) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 10; ++t) {
    const Mat psi = random_sym(3, rng);
    const Mat b = random_sym(3, rng);
    const auto oracle = suite::backend_shifted_psd(psi, b);
    ASSERT_TRUE(oracle.has_value());
    EXPECT_LE((b + project_psd(Mat(psi - b)) - *oracle).norm(), 1e-6);
  }
}

TEST(Linalg, ProjectPsdIdempotentAndNonexpansive) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 100; ++t) {
    const Index n = 2 + t % 5;
    const Mat a = random_sym(n, rng, 2.0);
    const Mat b = random_sym(n, rng, 2.0);
    const Mat pa = project_psd(a);
    const Mat pb = project_psd(b);
    EXPECT_LE((project_psd(pa) - pa).norm(), 1e-12 * (1.0 + pa.norm()));
    EXPECT_LE((pa - pb).norm(), (a - b).norm() * (1.0 + 1e-12));
    // Firm nonexpansiveness: ‖Pa − Pb‖² ≤ ⟨Pa − Pb, a − b⟩.
    EXPECT_LE((pa - pb).squaredNorm(), ((pa - pb).array() * (a - b).array()).sum() + 1e-10);
    EXPECT_GE(min_eigenvalue(pa), -1e-12);
  }
}

TEST(Linalg, PowerMethodKnownNorm) {
  // Singular values 3, 2, 1.
  std::mt19937_64 rng(7);
  const Mat q1 = sym_eig(random_sym(3, rng)).vectors;
  const Mat q2 = sym_eig(random_sym(3, rng)).vectors;
  Vec sv(3);
  sv << 3.0, 2.0, 1.0;
  const Mat a = q1 * sv.asDiagonal() * q2.transpose();
  const auto apply = [&](const Vec& x) { return Vec(a * x); };
  const auto adj = [&](const Vec& y) { return Vec(a.transpose() * y); };
  EXPECT_NEAR(power_method_norm(apply, adj, 3, 50, 0), 3.0, 1e-3);
  EXPECT_THROW(power_method_norm(apply, adj, 3, 0, 0), std::invalid_argument);
}

TEST(Linalg, PowerMethodLiftedZero) {
  // K = 0 inside x ↦ (Kx, x, x): norm √2.
  const Index n = 7;
  const auto apply = [&](const Vec& x) {
    Vec out = Vec::Zero(3 * n);
    out.segment(n, n) = x;
    out.tail(n) = x;
    return out;
  };
  const auto adj = [&](const Vec& y) { return Vec(y.segment(n, n) + y.tail(n)); };
  EXPECT_NEAR(power_method_norm(apply, adj, n, 12, 0), std::sqrt(2.0), 1e-6);
  const auto zero = [&](const Vec&) { return Vec(Vec::Zero(n)); };
  EXPECT_EQ(power_method_norm(zero, zero, n, 12, 0), 0.0);
}

TEST(Linalg, PowerMethodLowerBoundAndMonotone) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  for (int t = 0; t < 8; ++t) {
    const Index rows = 20 + 60 * t, cols = 10 + 40 * t;
    Mat a(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) a(i, j) = g(rng);
    const double exact = Eigen::JacobiSVD<Mat>(a).singularValues()[0];
    const auto apply = [&](const Vec& x) { return Vec(a * x); };
    const auto adj = [&](const Vec& y) { return Vec(a.transpose() * y); };
    double prev = 0.0;
    for (int it : {1, 2, 4, 8, 12, 24}) {
      const double est = power_method_norm(apply, adj, cols, it, 5);
      EXPECT_LE(est, exact * (1.0 + 1e-12));
      EXPECT_GE(est, prev * (1.0 - 1e-12));
      prev = est;
    }
    EXPECT_EQ(power_method_norm(apply, adj, cols, 12, 5), power_method_norm(apply, adj, cols, 12, 5));
  }
}
