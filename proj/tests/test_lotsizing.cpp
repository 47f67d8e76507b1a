#include "arpdps/io.hpp"
#include "arpdps/lotsizing.hpp"

#include "arp_fixtures.hpp"
#include "oracle_suite.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace arpdps;
using suite::gaussian;

namespace {

// Uncapacitated nominal LP: every unit of demand at j comes from the source i
// minimizing ξ_i + (shortest transport path i → j).
double nominal_lp_oracle(const LotSizingInstance& inst) {
  const int n = inst.n;
  Mat sp = inst.t;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) sp(i, j) = std::min(sp(i, j), sp(i, k) + sp(k, j));
  double total = 0.0;
  for (int j = 0; j < n; ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) best = std::min(best, inst.xi[i] + sp(i, j));
    total += best * inst.demand[j];
  }
  return total;
}

}  // namespace

TEST(LotSizing, ArpShape) {
  const auto arp = build_lotsizing(fixed_linear_instance(2));
  EXPECT_EQ(arp.d, 4);
  EXPECT_EQ(arp.q, 4);
  EXPECT_EQ(arp.k, 2);
  EXPECT_EQ(arp.m, 7);
  // Store 1: y_11, y_21, y_12, y_22 → (0, −1, 1, 0).
  EXPECT_LE((arp.c[0] - suite::vec_of({0.0, -1.0, 1.0, 0.0})).norm(), 0.0);
  EXPECT_LE((arp.c[1] - suite::vec_of({0.0, 1.0, -1.0, 0.0})).norm(), 0.0);
  EXPECT_LE((arp.c[2] - suite::vec_of({0.0, 2.0, 2.0, 0.0})).norm(), 0.0);
  for (int p = 0; p < 4; ++p) EXPECT_EQ(arp.c[3 + static_cast<std::size_t>(p)][p], -1.0);
  EXPECT_LE((arp.bvec[0] - suite::vec_of({-1.0, 0.0})).norm(), 0.0);
  EXPECT_LE((arp.bvec[1] - suite::vec_of({0.0, -1.0})).norm(), 0.0);
  EXPECT_LE(arp.b0.norm(), 0.0);
  EXPECT_EQ(arp.a0[0][0], -1.0);
  EXPECT_EQ(arp.a0[2][3], -1.0);
  EXPECT_EQ(arp.box_hi[0], 1000.0);
  EXPECT_EQ(arp.box_lo[1], 0.0);
  EXPECT_LE((arp.ball.center - Vec::Ones(2)).norm(), 0.0);
  EXPECT_EQ(arp.sos_set.gs.size(), 1u);
  EXPECT_EQ(arp.f.linear[2], 1.0);
  EXPECT_EQ(arp.f.linear[3], 1.0);

  const auto a4 = build_lotsizing(fixed_linear_instance(4));
  EXPECT_EQ(a4.m, 21);
  EXPECT_EQ(a4.q, 16);
  EXPECT_EQ(a4.k, 4);
  EXPECT_EQ(a4.d, 6);
}

TEST(LotSizing, RowsMatchModel) {
  // Slack of each robust row against the lot-sizing constraints written by hand.
  const auto inst = randomized_instance(3, 5);
  const auto arp = build_lotsizing(inst);
  const auto s = composite_dims(arp.d, arp.q, arp.k, arp.m);
  std::mt19937_64 rng(5);
  const CompositeProblem cp(arp);
  for (int t = 0; t < 20; ++t) {
    const Vec xt = gaussian(s.dim_x, rng);
    const Vec w = inst.demand + 0.5 * gaussian(3, rng);
    Vec y(arp.q);
    for (Index p = 0; p < arp.q; ++p) {
      double lin = xt[s.y0_off + p];
      for (Index j = 0; j < arp.k; ++j) lin += xt[s.u_off + p * arp.k + j] * w[j];
      y[p] = arp.rho * lin + (1.0 - arp.rho) * w.dot(cp.theta(xt, p) * w);
    }
    auto ship = [&](int i, int j) { return y[j * 3 + i]; };
    for (int i = 0; i < 3; ++i) {
      double in = 0.0, out = 0.0;
      for (int j = 0; j < 3; ++j) {
        in += ship(j, i);
        out += ship(i, j);
      }
      EXPECT_NEAR(robust_slack(arp, xt, i, w), xt[i] + in - out - w[i], 1e-12);
    }
    double tr = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) tr += inst.t(i, j) * ship(i, j);
    EXPECT_NEAR(robust_slack(arp, xt, 3, w), xt[4] - tr, 1e-12);
    for (int p = 0; p < 9; ++p) EXPECT_NEAR(robust_slack(arp, xt, 4 + p, w), y[p], 1e-12);
  }
}

TEST(LotSizing, InstanceGenerators) {
  const auto a = randomized_instance(4, 42);
  const auto b = randomized_instance(4, 42);
  EXPECT_LE((a.xi - b.xi).norm(), 0.0);
  EXPECT_LE((a.t - b.t).norm(), 0.0);
  EXPECT_GE(a.xi.minCoeff(), 0.5);
  EXPECT_LE(a.xi.maxCoeff(), 1.5);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      if (i == j) {
        EXPECT_EQ(a.t(i, j), 0.0);
      } else {
        EXPECT_GE(a.t(i, j), 1.0);
        EXPECT_LE(a.t(i, j), 3.0);
      }
    }
  EXPECT_NE(run_seed(0, 0), run_seed(0, 1));
  const auto q = fixed_quartic_instance(2);
  EXPECT_TRUE(q.quartic());
  EXPECT_FALSE(fixed_linear_instance(2).quartic());
  EXPECT_DOUBLE_EQ(q.production_cost(suite::vec_of({2.0, 1.0})), 17.0);

  auto bad = fixed_linear_instance(2);
  bad.t(0, 0) = 1.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = fixed_linear_instance(2);
  bad.rho = -0.1;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(LotSizing, NominalFixedInstances) {
  const auto l2 = solve_nominal(fixed_linear_instance(2));
  ASSERT_EQ(l2.report.status, PdpsStatus::converged);
  EXPECT_NEAR(l2.objective, 2.0, 1e-4);
  const auto l4 = solve_nominal(fixed_linear_instance(4));
  ASSERT_EQ(l4.report.status, PdpsStatus::converged);
  EXPECT_NEAR(l4.objective, 4.0, 1e-4);
  const auto q2 = solve_nominal(fixed_quartic_instance(2));
  ASSERT_EQ(q2.report.status, PdpsStatus::converged) << q2.report.message;
  EXPECT_NEAR(q2.objective, 2.0, 1e-4);
  EXPECT_NEAR(q2.x[0], 1.0, 1e-3);
  EXPECT_NEAR(q2.x[1], 1.0, 1e-3);
}

TEST(LotSizing, NominalMatchesLpOracle) {
  for (int n = 2; n <= 3; ++n) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto inst = randomized_instance(n, seed);
      const auto res = solve_nominal(inst);
      ASSERT_EQ(res.report.status, PdpsStatus::converged);
      const double want = nominal_lp_oracle(inst);
      EXPECT_NEAR(res.objective, want, 1e-5 * want) << "N=" << n << " seed=" << seed;
    }
  }
}

TEST(LotSizing, NominalInfeasibleCapacity) {
  auto inst = fixed_linear_instance(2);
  inst.capacity = 0.4;
  EXPECT_THROW(solve_nominal(inst), std::runtime_error);
}

TEST(LotSizing, PriceOfRobustness) {
  EXPECT_NEAR(price_of_robustness(3.9927, 2.0), 99.635, 1e-9);
  EXPECT_DOUBLE_EQ(price_of_robustness(2.0, 2.0), 0.0);
  EXPECT_THROW(price_of_robustness(1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(price_of_robustness(1.0, -1.0), std::invalid_argument);
}

TEST(LotSizing, ZeroRadiusIsNominal) {
  PdpsConfig cfg;
  const auto rec = solve_instance(fixed_linear_instance(2, 0.0), cfg, 0);
  EXPECT_EQ(rec.status, "converged");
  EXPECT_DOUBLE_EQ(rec.por_percent, 0.0);
  EXPECT_NEAR(rec.objective, 2.0, 1e-4);
}

TEST(LotSizing, Enums) {
  for (auto e : {Experiment::I, Experiment::II, Experiment::III})
    EXPECT_EQ(experiment_from_string(to_string(e)), e);
  for (auto c : {CostMode::linear, CostMode::quartic, CostMode::randomized})
    EXPECT_EQ(cost_mode_from_string(to_string(c)), c);
  EXPECT_THROW(experiment_from_string("IV"), std::invalid_argument);
  EXPECT_THROW(cost_mode_from_string("cubic"), std::invalid_argument);
  ExperimentConfig c;
  c.experiment = Experiment::I;
  EXPECT_EQ(c.effective_cost_mode(), CostMode::randomized);
  c.experiment = Experiment::III;
  EXPECT_EQ(c.effective_cost_mode(), CostMode::quartic);
}

TEST(LotSizing, ConfigJsonRoundTrip) {
  ExperimentConfig c;
  c.experiment = Experiment::I;
  c.n_values = {2, 3};
  c.r_grid = {0.0, 0.5, 1.0};
  c.runs = 4;
  c.seed = 99;
  c.eps = 1e-4;
  c.output = "out.csv";
  const auto j = io::to_json(c);
  const auto back = io::experiment_config_from_json(j);
  EXPECT_EQ(back.experiment, c.experiment);
  EXPECT_EQ(back.n_values, c.n_values);
  EXPECT_EQ(back.r_grid, c.r_grid);
  EXPECT_EQ(back.runs, 4);
  EXPECT_EQ(back.seed, 99u);
  EXPECT_DOUBLE_EQ(back.eps, 1e-4);
  EXPECT_EQ(back.output, "out.csv");

  auto bad = j;
  bad["unknown_key"] = 1;
  EXPECT_THROW(io::experiment_config_from_json(bad), std::invalid_argument);
  auto neg = j;
  neg["runs"] = 0;
  EXPECT_THROW(io::experiment_config_from_json(neg), std::invalid_argument);
}

TEST(LotSizing, ArpJsonRoundTrip) {
  const auto arp = build_lotsizing(randomized_instance(3, 8));
  const auto j = io::to_json(arp);
  const auto back = io::arp_from_json(io::Json::parse(j.dump()));
  const CompositeProblem a(arp), b(back);
  std::mt19937_64 rng(8);
  const Vec x = gaussian(a.dims().dim_x, rng);
  EXPECT_LE((a.apply_K(x) - b.apply_K(x)).norm(), 1e-12);
  EXPECT_EQ(back.box_hi[3], std::numeric_limits<double>::infinity());
  EXPECT_EQ(back.sos_set.gs.size(), 1u);
  ASSERT_TRUE(back.sos_set.slater_point.has_value());
  EXPECT_LE((*back.sos_set.slater_point - *arp.sos_set.slater_point).norm(), 0.0);
}

TEST(LotSizing, CsvLayout) {
  RunRecord r{2, 0.5, 7, 3.5, 2.0, 75.0, 1234, 0.25, "converged"};
  std::ostringstream os;
  io::write_csv(os, {r});
  std::istringstream is(os.str());
  std::string header, row;
  std::getline(is, header);
  std::getline(is, row);
  EXPECT_EQ(header, "N,r,seed,objective,nominal,por_percent,iterations,wall_time_s,status");
  EXPECT_EQ(row.substr(0, 6), "2,0.5,");
  EXPECT_NE(row.find(",1234,"), std::string::npos);
  EXPECT_EQ(row.substr(row.size() - 9), "converged");
}

TEST(LotSizing, SmallSweep) {
  ExperimentConfig c;
  c.experiment = Experiment::I;
  c.n_values = {2};
  c.r_grid = {0.0, 0.3};
  c.runs = 2;
  c.seed = 3;
  c.output = (std::filesystem::temp_directory_path() / "arpdps_sweep_test.csv").string();
  const auto recs = run_experiment(c);
  ASSERT_EQ(recs.size(), 4u);
  EXPECT_EQ(recs[0].r, 0.0);
  EXPECT_EQ(recs[1].r, 0.3);
  EXPECT_EQ(recs[0].seed, recs[1].seed);
  EXPECT_NE(recs[0].seed, recs[2].seed);
  for (const auto& r : recs) EXPECT_EQ(r.status, "converged");
  EXPECT_DOUBLE_EQ(recs[0].por_percent, 0.0);
  EXPECT_GT(recs[1].por_percent, 0.0);
  EXPECT_DOUBLE_EQ(recs[1].nominal, recs[0].objective);

  io::write_outputs(c.output, c, recs);
  std::ifstream csv(c.output);
  EXPECT_TRUE(csv.good());
  const auto agg_path = std::filesystem::path(c.output).replace_extension(".json");
  std::ifstream agg(agg_path);
  ASSERT_TRUE(agg.good());
  const auto j = io::Json::parse(agg);
  EXPECT_FALSE(j.empty());
}
