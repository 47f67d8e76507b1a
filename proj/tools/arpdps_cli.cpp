// Command-line front end: single lot-sizing solves and experiment sweeps.
#include "arpdps/io.hpp"
#include "arpdps/lotsizing.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace arpdps;

namespace {

int run_solve(const std::string& model, int n, const std::string& cost, double r, double rho, double eps,
              std::uint64_t seed, int max_iters, const std::string& out) {
  if (model != "lotsizing") throw std::invalid_argument("unknown model '" + model + "' (only lotsizing is available)");
  const CostMode mode = cost_mode_from_string(cost);
  const LotSizingInstance inst = make_instance(mode, n, r, rho, seed);
  PdpsConfig cfg;
  cfg.eps = eps;
  cfg.max_iters = max_iters;
  cfg.seed = seed;

  const RunRecord rec = solve_instance(inst, cfg, seed);
  io::Json doc = io::to_json(rec);
  doc["cost"] = cost;
  doc["rho"] = rho;
  if (r >= 1e-6) {
    const auto dims = composite_dims(n + 2, n * n, n, n * n + n + 1);
    doc["dimension"] = dims.total();
  }
  std::cout << doc.dump(2) << '\n';
  if (!out.empty()) {
    std::ofstream os(out);
    if (!os) throw std::runtime_error("cannot write '" + out + "'");
    os << doc.dump(2) << '\n';
  }
  return rec.status == "converged" ? 0 : 2;
}

int run_experiment_cmd(const std::string& path) {
  const ExperimentConfig cfg = io::load_experiment_config(path);
  const auto records = run_experiment(cfg);
  if (cfg.output.empty()) {
    io::write_csv(std::cout, records);
  } else {
    io::write_outputs(cfg.output, cfg, records);
    std::cout << "wrote " << records.size() << " records to " << cfg.output << '\n';
  }
  std::cout << io::aggregate(records).dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adjustable robust optimization with quadratic decision rules via primal-dual splitting"};
  app.require_subcommand(1);

  auto* solve_cmd = app.add_subcommand("solve", "Solve one instance");
  std::string model = "lotsizing";
  int n = 2;
  std::string cost = "linear";
  double r = 1.0;
  double rho = 0.5;
  double eps = 1e-5;
  std::uint64_t seed = 0;
  int max_iters = 100000;
  std::string out;
  solve_cmd->add_option("--model", model, "Problem family")->check(CLI::IsMember({"lotsizing"}));
  solve_cmd->add_option("--N", n, "Number of stores")->check(CLI::Range(1, 64));
  solve_cmd->add_option("--cost", cost, "Cost structure")->check(CLI::IsMember({"linear", "quartic", "randomized"}));
  solve_cmd->add_option("--r", r, "Squared radius of the demand ball")->check(CLI::NonNegativeNumber);
  solve_cmd->add_option("--rho", rho, "Affine weight of the decision rule")->check(CLI::Range(0.0, 1.0));
  solve_cmd->add_option("--eps", eps, "Stopping tolerance")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--seed", seed, "Seed for randomized costs and the power method");
  solve_cmd->add_option("--max-iters", max_iters, "Iteration cap")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--out", out, "Write the JSON result here");

  auto* exp_cmd = app.add_subcommand("experiment", "Run an experiment sweep from a JSON config");
  std::string config;
  exp_cmd->add_option("--config", config, "Config file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*solve_cmd) return run_solve(model, n, cost, r, rho, eps, seed, max_iters, out);
    return run_experiment_cmd(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
