// Primal-dual proximal splitting (Chambolle-Pock with θ = 1) for
//   min F(x) + Σ_j G_j(L_j x),
// plus the instantiation for the composite robust problem.
#pragma once

#include "arpdps/reformulator.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace arpdps {

struct PdpsConfig {
  double sigma = 0.5;
  std::optional<double> tau;  ///< default 1.3 / (σ · est²)
  double theta = 1.0;
  double eps = 1e-5;
  int max_iters = 100000;
  int power_iters = 12;
  std::uint64_t seed = 0;
  double inner_tol = kDefaultInnerTol;
  bool warm_start_inner = false;
  bool record_history = false;
  bool debug_checks = false;  ///< Moreau-identity check on the dual proxes every 100 iterations
  double norm_inflation = 1.02;
};

enum class PdpsStatus { converged, max_iters, inner_failure };
std::string to_string(PdpsStatus s);

struct SolveReport {
  PdpsStatus status = PdpsStatus::max_iters;
  Vec x;  ///< final primal iterate
  Vec y;  ///< final dual iterate (all blocks concatenated)
  double objective = 0.0;
  int iterations = 0;
  double wall_time_s = 0.0;
  double tau = 0.0;
  double sigma = 0.0;
  double norm_estimate = 0.0;  ///< inflated estimate of ‖L‖
  double rel_dx = 0.0;
  double rel_dy = 0.0;
  long inner_iterations = 0;
  std::string message;
  std::vector<std::pair<double, double>> history;  ///< (rel Δx, rel Δy) per iteration
};

/// One dual block: the operator L_j with its adjoint and the prox of σG_j*.
struct DualBlock {
  std::string name;
  Index dim = 0;
  std::function<void(const Vec& x, Eigen::Ref<Vec> out)> apply;
  std::function<void(const Eigen::Ref<const Vec>& y, Vec& acc)> adjoint_add;  ///< acc += L_jᵀy
  /// In place. Returns false when an inner solve fails; `err` then explains.
  std::function<bool(Eigen::Ref<Vec> y, double sigma, std::string& err, long& inner_iters)> prox_conj;
  /// Optional: Moreau check y = prox_conj(y) + σ·prox_{G/σ}(y/σ); returns the residual.
  std::function<double(const Vec& in, const Vec& out, double sigma)> moreau_residual;
};

struct SplittingProblem {
  Index primal_dim = 0;
  std::function<void(Vec& x, double tau)> prox_f;
  std::function<double(const Vec& x)> objective;
  std::vector<DualBlock> blocks;
  /// Optional exact norm of L = (L_1, ..., L_J) to skip the power method.
  std::optional<double> norm;
};

/// Runs the splitting from x = 0, y = 0. Throws std::invalid_argument when a
/// user step size violates τσ‖L‖² < 4/3.
SolveReport run_pdps(const SplittingProblem& prob, const PdpsConfig& cfg);

/// Proximal maps of the composite robust problem.
/// prox_{τF}: objective atoms on x, identity on recourse data, λ ← max(λ, 0).
Vec prox_F(const CompositeProblem& cp, const Vec& xt, double tau);
/// prox_{σE*}(z) = z − σ·P_C(z/σ) on the x part, zero elsewhere.
Vec prox_E_star(const CompositeProblem& cp, const Vec& z, double sigma);
/// prox_{σG*}(Ψ) = Ψ − σ(B + P_{S+}(Ψ/σ − B)) blockwise.
Vec prox_G_star(const CompositeProblem& cp, const Vec& yt, double sigma);

/// Builds the splitting problem with L = K̆ = (K, I, I).
SplittingProblem make_splitting(const CompositeProblem& cp, std::shared_ptr<const SdpBackend> backend,
                                const PdpsConfig& cfg);

/// Solves the composite problem. `objective` in the report is f(x).
SolveReport solve(const CompositeProblem& cp, const PdpsConfig& cfg = {},
                  std::shared_ptr<const SdpBackend> backend = nullptr);

}  // namespace arpdps
