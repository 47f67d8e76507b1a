// Two-stage adjustable robust problems with a quadratic decision rule and ball
// uncertainty, and their composite form F + E + H + G∘K.
//
// Primal vector x̃ = (x, y0, U, Θ_1..Θ_q, λ) is stored flat:
//   x ∈ R^d | y0 ∈ R^q | U ∈ R^{q×k} row-major | svec(Θ_p), p = 1..q | λ ∈ R^m
// Dual vector ỹ = (Ψ_1, ..., Ψ_m) stores svec(Ψ_i) of each (k+1)×(k+1) block.
#pragma once

#include "arpdps/linalg.hpp"
#include "arpdps/projections.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace arpdps {

/// {w : ‖w − center‖² ≤ r}
struct BallUncertainty {
  Vec center;
  double r = 1.0;
};

/// f(x) = Σ_i γ_i x_i + ½ q_i x_i² + ι_[lo_i, hi_i](x_i). Empty `quadratic`,
/// `lo` or `hi` mean absent.
struct ObjectiveAtoms {
  Vec linear;
  Vec quadratic;
  Vec lo;
  Vec hi;

  void validate(Index d) const;
  double value(const Vec& x) const;
  /// argmin_z f(z) + ‖z − x‖²/(2τ)
  Vec prox(const Vec& x, double tau) const;
};

struct ArpProblem {
  int d = 0;
  int q = 0;
  int m = 0;
  int k = 0;
  std::vector<Vec> a0;    ///< a_i^(0) ∈ R^d
  std::vector<Mat> a;     ///< A_i = [a_i^(1) ... a_i^(k)] ∈ R^{d×k}
  Vec b0;                 ///< b_i^(0)
  std::vector<Vec> bvec;  ///< (b_i^(1), ..., b_i^(k))
  std::vector<Vec> c;     ///< c_i ∈ R^q
  BallUncertainty ball;
  Vec box_lo;  ///< set C; ±inf allowed
  Vec box_hi;
  SosConvexSet sos_set;  ///< set D over R^d (may have no constraints)
  ObjectiveAtoms f;
  double rho = 0.5;

  /// Shapes, finiteness, ρ ∈ [0, 1] and lo ≤ hi. Does not require r > 0.
  void validate() const;
};

/// Offsets into x̃ and the sizes of every space.
struct CompositeDims {
  Index d = 0, q = 0, k = 0, m = 0;
  Index y0_off = 0, u_off = 0, theta_off = 0, lambda_off = 0;
  Index theta_len = 0;  ///< svec length of one Θ_p
  Index block_len = 0;  ///< svec length of one Ψ_i
  Index dim_x = 0;      ///< d + q + qk + q·k(k+1)/2 + m
  Index dim_y = 0;      ///< m·(k+1)(k+2)/2
  Index dim_lifted = 0; ///< dim_y + 2·dim_x
  Index total() const { return dim_x + dim_lifted; }
};

CompositeDims composite_dims(int d, int q, int k, int m);

/// Composite reformulation of an ArpProblem. Immutable after construction.
class CompositeProblem {
 public:
  /// Throws std::invalid_argument when r ≤ 0 or the data is inconsistent.
  explicit CompositeProblem(ArpProblem arp);

  const ArpProblem& arp() const { return arp_; }
  const CompositeDims& dims() const { return dims_; }
  const std::vector<Mat>& offsets() const { return b_; }
  /// Nonzero (i, c_i^(p)) pairs for each recourse index p.
  const std::vector<std::vector<std::pair<int, double>>>& c_columns() const { return c_cols_; }
  /// Nonzero (p, c_i^(p)) pairs for each constraint i.
  const std::vector<std::vector<std::pair<int, double>>>& c_rows() const { return c_rows_; }
  double d_norm2() const { return d_norm2_; }

  Vec apply_K(const Vec& xt) const;
  Vec apply_K_adjoint(const Vec& yt) const;
  /// K̆x̃ = (Kx̃, x̃, x̃) and its adjoint (Ψ, z1, z2) ↦ K*Ψ + z1 + z2.
  Vec apply_lifted(const Vec& xt) const;
  Vec apply_lifted_adjoint(const Vec& yl) const;

  /// Dense (k+1)×(k+1) block i of ỹ.
  Mat block(const Vec& yt, Index i) const;
  /// Θ_p as a dense k×k matrix.
  Mat theta(const Vec& xt, Index p) const;

 private:
  ArpProblem arp_;
  CompositeDims dims_;
  std::vector<Mat> b_;
  std::vector<std::vector<std::pair<int, double>>> c_cols_;
  std::vector<std::vector<std::pair<int, double>>> c_rows_;
  double d_norm2_ = 0.0;
};

CompositeProblem build_composite(ArpProblem arp);

/// True when every block of Kx̃ − B_i has minimum eigenvalue ≥ −tol and λ ≥ −tol.
bool lmi_feasibility(const CompositeProblem& cp, const Vec& xt, double tol);

struct RobustMargin {
  double margin = 0.0;  ///< min over samples and constraints of the slack
  int worst_constraint = -1;
  Vec worst_w;
};

/// Slack b_i(w) − a_i(w)ᵀx − c_iᵀy(w) of every robust row under the decision
/// rule, minimized over `n_samples` points of the ball (half uniform in the
/// interior, half on the sphere) plus the center. `xt` may be the full x̃ or
/// its prefix without λ.
RobustMargin robust_feasibility_sample(const ArpProblem& arp, const Vec& xt, int n_samples, std::uint64_t seed);

/// Slack of row i at a single scenario w.
double robust_slack(const ArpProblem& arp, const Vec& xt, int i, const Vec& w);

}  // namespace arpdps
