// Single-period lot-sizing with transshipment under ball-uncertain demand:
// instance generator, ARP mapping, nominal model, price of robustness and the
// experiment drivers.
//
// First-stage variables (x_1..x_N, ϱ, ζ); recourse y_ij (ship i → j) stored
// column by column: y_ij sits at index (j−1)N + (i−1).
#pragma once

#include "arpdps/pdps.hpp"

#include <optional>
#include <string>
#include <vector>

namespace arpdps {

struct LotSizingInstance {
  int n = 2;
  Vec nu;   ///< quartic cost coefficients
  Vec phi;  ///< quadratic cost coefficients
  Vec xi;   ///< linear cost coefficients
  Mat t;    ///< transport cost per unit, zero diagonal
  double capacity = 1000.0;  ///< Γ
  Vec demand;                ///< nominal demand d
  double r = 1.0;
  double rho = 0.5;

  void validate() const;
  /// Σ_i ν_i x_i⁴ + φ_i x_i² + ξ_i x_i
  double production_cost(const Vec& x) const;
  bool quartic() const;
};

/// ξ = 1, t = 2 off the diagonal.
LotSizingInstance fixed_linear_instance(int n, double r = 1.0);
/// ν = 1, t = 2 off the diagonal.
LotSizingInstance fixed_quartic_instance(int n, double r = 1.0);
/// ξ_i ~ U(0.5, 1.5), t_ij ~ U(1, 3) off the diagonal, from `seed`.
LotSizingInstance randomized_instance(int n, std::uint64_t seed, double r = 1.0);

/// Production epigraph g1(x, ϱ, ζ) = Σ cost_i(x_i) − ϱ over R^{N+2}.
Polynomial production_epigraph(const LotSizingInstance& inst);

ArpProblem build_lotsizing(const LotSizingInstance& inst);

struct NominalResult {
  Vec x;   ///< (x, ϱ, ζ, y) at the final iterate
  double objective = 0.0;  ///< ϱ + ζ
  SolveReport report;
};

/// Deterministic model with w = d, solved by PDPS over z = (x, ϱ, ζ, y) with
/// two identity blocks, box (x ∈ [0,Γ], y ≥ 0) and production epigraph, and
/// one block for the flow and transport rows Az ≤ h (rows scaled to unit
/// norm). `eps` defaults to 1e-8.
/// Throws std::runtime_error when total capacity cannot cover the demand.
PdpsConfig nominal_config();
NominalResult solve_nominal(const LotSizingInstance& inst, const PdpsConfig& cfg = nominal_config(),
                            std::shared_ptr<const SdpBackend> backend = nullptr);

/// 100(χ_r − χ_n)/χ_n; throws std::invalid_argument when χ_n ≤ 0.
double price_of_robustness(double chi_r, double chi_n);

enum class Experiment { I, II, III };
enum class CostMode { linear, quartic, randomized };
std::string to_string(Experiment e);
std::string to_string(CostMode c);
Experiment experiment_from_string(const std::string& s);
CostMode cost_mode_from_string(const std::string& s);

struct ExperimentConfig {
  Experiment experiment = Experiment::II;
  std::vector<int> n_values{2};
  std::vector<double> r_grid{1.0};
  int runs = 1;
  std::uint64_t seed = 0;
  /// Defaults to randomized for I, linear for II, quartic for III.
  std::optional<CostMode> cost_mode;
  double rho = 0.5;
  double eps = 1e-5;
  int max_iters = 100000;
  std::string output;  ///< CSV path; the aggregate JSON goes next to it. Empty: no files.

  void validate() const;
  CostMode effective_cost_mode() const;
};

struct RunRecord {
  int n = 0;
  double r = 0.0;
  std::uint64_t seed = 0;
  double objective = 0.0;
  double nominal = 0.0;
  double por_percent = 0.0;
  int iterations = 0;
  double wall_time_s = 0.0;
  std::string status;
};

/// Per-run instance seed.
std::uint64_t run_seed(std::uint64_t base, int run);

/// Instance for one run under the configured cost mode.
LotSizingInstance make_instance(CostMode mode, int n, double r, double rho, std::uint64_t seed);

/// Robust solve for one instance; r < 1e-6 returns the nominal solve.
RunRecord solve_instance(const LotSizingInstance& inst, const PdpsConfig& cfg, std::uint64_t seed,
                         std::optional<double> nominal = std::nullopt);

/// Runs the sweep as a parallel map over independent solves. Records come back
/// ordered by (N, run, r). Failures are recorded in `status`.
std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg);

}  // namespace arpdps
