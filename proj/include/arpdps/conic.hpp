// Uniform interface to a semidefinite programming backend.
//
// Problems are stated over PSD block variables X_b and free scalars u:
//
//   minimize    ⟨C, X⟩ + cᵀu + offset
//   subject to  ⟨A_i, X⟩ + f_iᵀu  = b_i    (equalities)
//               ⟨G_j, X⟩ + h_jᵀu ≤ e_j    (inequalities)
//               X_b ⪰ 0
//
// A functional entry (block, row, col, value) contributes value·X_b(row, col);
// since X_b is symmetric, (r, c) and (c, r) address the same variable.
#pragma once

#include "arpdps/linalg.hpp"

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace arpdps {

struct BlockEntry {
  int block = 0;
  int row = 0;
  int col = 0;
  double value = 0.0;
};

struct ScalarEntry {
  int index = 0;
  double value = 0.0;
};

struct LinearFunctional {
  std::vector<BlockEntry> blocks;
  std::vector<ScalarEntry> scalars;

  LinearFunctional& add(int block, int row, int col, double value) {
    blocks.push_back({block, row, col, value});
    return *this;
  }
  LinearFunctional& add_scalar(int index, double value) {
    scalars.push_back({index, value});
    return *this;
  }
};

struct LinearConstraint {
  LinearFunctional lhs;
  double rhs = 0.0;
};

/// Prior iterate attached by warm_hint.
struct SdpHint {
  std::vector<Mat> blocks;
  Vec scalars;
  std::vector<Mat> dual_blocks;
  Vec eq_duals;
  Vec ineq_duals;
};

struct SdpProblem {
  std::vector<int> psd_blocks;
  int free_vars = 0;
  LinearFunctional objective;
  double objective_offset = 0.0;
  std::vector<LinearConstraint> eq_constraints;
  std::vector<LinearConstraint> ineq_constraints;
  std::optional<SdpHint> hint;

  /// Throws std::invalid_argument when a footprint leaves the declared
  /// blocks/scalars or data is non-finite.
  void validate() const;
};

enum class SdpStatus { optimal, inaccurate, infeasible, unbounded, error };

std::string to_string(SdpStatus s);

struct SdpSolution {
  std::vector<Mat> block_values;
  Vec scalar_values;
  std::vector<Mat> dual_blocks;  ///< dual slack Z per block
  Vec eq_duals;                  ///< y for equalities
  Vec ineq_duals;                ///< multipliers ≥ 0 for inequalities
  double objective_value = 0.0;
  double dual_objective_value = 0.0;
  double gap = 0.0;  ///< |primal − dual|
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  SdpStatus status = SdpStatus::error;
  std::string message;

  bool ok() const { return status == SdpStatus::optimal; }
};

class SdpBackend {
 public:
  virtual ~SdpBackend() = default;
  virtual SdpSolution solve(const SdpProblem& p, double tol) const = 0;
  virtual std::string name() const = 0;
};

struct InteriorPointOptions {
  int max_iters = 100;
  bool use_hint = true;
  double step_fraction_min = 0.9;
  bool verbose = false;  ///< one line per iteration on stderr
};

/// Dense primal-dual path-following method (HKM direction, Mehrotra
/// predictor-corrector) for small block SDPs. Inequalities become
/// nonnegative slacks; free scalars enter through the augmented Newton system.
class InteriorPointBackend final : public SdpBackend {
 public:
  explicit InteriorPointBackend(InteriorPointOptions opts = {}) : opts_(opts) {}
  SdpSolution solve(const SdpProblem& p, double tol) const override;
  std::string name() const override { return "dense-ipm"; }

 private:
  InteriorPointOptions opts_;
};

/// Backend wired into the build.
std::shared_ptr<const SdpBackend> default_backend();

inline constexpr double kDefaultInnerTol = 1e-8;

/// Validates `tol` ∈ (0, 1e-2] and dispatches to `backend`. Infeasible or
/// unbounded problems are reported through the status, never thrown.
SdpSolution solve_sdp(const SdpProblem& p, double tol = kDefaultInnerTol, const SdpBackend* backend = nullptr);

/// Attaches `prior` as an initial guess; throws on shape mismatch.
SdpProblem warm_hint(SdpProblem p, const SdpSolution& prior);

/// Evaluates a functional at (blocks, scalars).
double evaluate(const LinearFunctional& f, const std::vector<Mat>& blocks, const Vec& scalars);

/// Sparse text dump, one line per nonzero: `<section> <index> <block> <row> <col> <value>`.
void dump_sparse(const SdpProblem& p, std::ostream& os);

}  // namespace arpdps
