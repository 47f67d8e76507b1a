#include "arpdps/projections.hpp"

#include "oracle_suite.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace arpdps;

TEST(Projections, IntervalMoment) {
  const auto set = SosConvexSet::make(1, {Polynomial(1, {{{2}, 1.0}, {{0}, -1.0}})});
  const auto r = project_sos_convex(Vec::Constant(1, 2.0), set, *default_backend());
  ASSERT_TRUE(r.ok()) << r.message;
  EXPECT_NEAR(r.point[0], 1.0, 1e-6);
  EXPECT_NEAR(r.distance2, 1.0, 1e-6);
}

TEST(Projections, QuarticEpigraph) {
  const auto set = SosConvexSet::make(2, {Polynomial(2, {{{4, 0}, 1.0}, {{0, 1}, -1.0}})});
  Vec v(2);
  v << 2.0, 0.0;
  const auto r = project_sos_convex(v, set, *default_backend());
  ASSERT_TRUE(r.ok()) << r.message;
  const auto o = oracle_project(v, handles_from(set.gs));
  EXPECT_TRUE(o.converged);
  EXPECT_NEAR((r.point - o.point).norm(), 0.0, 1e-5) << r.point.transpose() << " vs " << o.point.transpose();
}

TEST(Projections, Disk) {
  QuadraticSet s;
  s.dim = 2;
  s.constraints.push_back({Mat::Identity(2, 2), Vec::Zero(2), -1.0});
  Vec v(2);
  v << 2.0, 0.0;
  const auto r = project_quadratic_set(v, s, *default_backend());
  ASSERT_TRUE(r.ok());
  EXPECT_NEAR(r.point[0], 1.0, 1e-6);
  EXPECT_NEAR(r.point[1], 0.0, 1e-6);
}

TEST(Projections, QuadraticSuiteMatchesOracle) {
  const auto cases = suite::quadratic_cases();
  ASSERT_GE(cases.size(), 20u);
  for (const auto& c : cases) {
    const auto r = project_quadratic_set(c.v, c.set, *default_backend());
    ASSERT_TRUE(r.status == SdpStatus::optimal || r.status == SdpStatus::inaccurate) << c.name << ": " << r.message;
    const auto o = oracle_project(c.v, suite::quad_handles(c.set));
    ASSERT_TRUE(o.converged) << c.name;
    EXPECT_LE((r.point - o.point).norm(), 1e-4) << c.name;
    EXPECT_LE(suite::rel_gap(r), 1e-6) << c.name;
  }
}

TEST(Projections, SosSuiteMatchesOracleAndJensen) {
  const auto cases = suite::sos_cases();
  ASSERT_GE(cases.size(), 20u);
  for (const auto& c : cases) {
    const auto r = project_sos_convex(c.v, c.set, *default_backend());
    ASSERT_TRUE(r.status == SdpStatus::optimal || r.status == SdpStatus::inaccurate) << c.name << ": " << r.message;
    const auto o = oracle_project(c.v, handles_from(c.set.gs));
    ASSERT_TRUE(o.converged) << c.name;
    EXPECT_LE((r.point - o.point).norm(), 1e-4) << c.name;
    EXPECT_LE(suite::rel_gap(r), 1e-6) << c.name;
    // g(L(x)) ≤ L(g) for every constraint.
    ASSERT_TRUE(r.moment_basis.has_value());
    const Vec& first = r.sdp_point;
    for (const auto& g : c.set.gs) {
      const Polynomial gr = g.restrict_to(r.active_coords);
      EXPECT_GE(riesz(gr, *r.moment_basis, r.moments) - gr.eval(first), -1e-7) << c.name;
    }
  }
}

TEST(Projections, PointInsideIsFixed) {
  const auto set = SosConvexSet::make(2, {Polynomial(2, {{{4, 0}, 1.0}, {{0, 1}, -1.0}})});
  const Vec v = suite::vec_of({0.5, 1.0});
  const auto r = project_sos_convex(v, set, *default_backend());
  EXPECT_LE((r.point - v).norm(), 1e-5);
}

TEST(Projections, UnusedCoordinatePassesThrough) {
  // g depends on x0 only; x1 must come back untouched.
  const auto set = SosConvexSet::make(2, {Polynomial(2, {{{2, 0}, 1.0}, {{0, 0}, -1.0}})}, suite::vec_of({0.0, 0.0}));
  const auto r = project_sos_convex(suite::vec_of({3.0, -7.25}), set, *default_backend());
  ASSERT_EQ(r.active_coords, std::vector<int>{0});
  EXPECT_NEAR(r.point[0], 1.0, 1e-6);
  EXPECT_EQ(r.point[1], -7.25);
}

TEST(Projections, SlaterPointMustBeStrict) {
  const auto set = SosConvexSet::make(1, {Polynomial(1, {{{2}, 1.0}, {{0}, -1.0}})}, suite::vec_of({1.0}));
  EXPECT_THROW(project_sos_convex(suite::vec_of({2.0}), set, *default_backend()), std::invalid_argument);
  EXPECT_NO_THROW(project_sos_convex(suite::vec_of({2.0}), set, *default_backend(), kDefaultInnerTol, true));
}

TEST(Projections, MissingSlaterPointIsFlagged) {
  const auto set = SosConvexSet::make(1, {Polynomial(1, {{{2}, 1.0}, {{0}, -1.0}})});
  const auto r = project_sos_convex(suite::vec_of({2.0}), set, *default_backend());
  EXPECT_NE(r.message.find("no Slater point"), std::string::npos);
}

TEST(Projections, EmptySetIsReported) {
  // x² + 1 ≤ 0 has no solution.
  const auto set = SosConvexSet::make(1, {Polynomial(1, {{{2}, 1.0}, {{0}, 1.0}})});
  const auto r = project_sos_convex(suite::vec_of({0.0}), set, *default_backend(), kDefaultInnerTol, true);
  EXPECT_EQ(r.status, SdpStatus::infeasible);
}

TEST(Projections, Box) {
  const Vec r = project_box(suite::vec_of({-1.0, 0.5, 3.0}), Vec::Zero(3), Vec::Ones(3));
  EXPECT_EQ(r, suite::vec_of({0.0, 0.5, 1.0}));
  EXPECT_THROW(project_box(Vec::Zero(1), Vec::Ones(1), Vec::Zero(1)), std::invalid_argument);
}

TEST(Projections, ShiftedPsd) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int t = 0; t < 20; ++t) {
    Mat a(4, 4), b(4, 4);
    for (Index i = 0; i < 16; ++i) {
      a.data()[i] = g(rng);
      b.data()[i] = g(rng);
    }
    a = (0.5 * (a + a.transpose())).eval();
    b = (0.5 * (b + b.transpose())).eval();
    const Mat p = project_shifted_psd(a, b);
    EXPECT_GE(min_eigenvalue(p - b), -1e-10);
    EXPECT_LE((project_shifted_psd(p, b) - p).norm(), 1e-10);
    // Variational inequality against random points of B + S+.
    for (int s = 0; s < 5; ++s) {
      Mat l(4, 4);
      for (Index i = 0; i < 16; ++i) l.data()[i] = g(rng);
      const Mat q = b + l * l.transpose();
      EXPECT_LE(((a - p).array() * (q - p).array()).sum(), 1e-9);
    }
  }
}

TEST(Projections, QuarticEpigraphFarPoint) {
  // Points far outside produce badly scaled moment matrices.
  const auto set = SosConvexSet::make(3, {Polynomial(3, {{{4, 0, 0}, 1.0}, {{0, 4, 0}, 1.0}, {{0, 0, 1}, -1.0}})},
                                      suite::vec_of({0.5, 0.5, 1.0}));
  const Vec v = suite::vec_of({29.46764274468541, 29.467642723644627, 8.4724892632960493});
  const auto r = project_sos_convex(v, set, *default_backend());
  ASSERT_TRUE(r.status == SdpStatus::optimal || r.status == SdpStatus::inaccurate) << r.message;
  const auto o = oracle_project(v, handles_from(set.gs));
  EXPECT_LE((r.point - o.point).norm(), 1e-4);
}
