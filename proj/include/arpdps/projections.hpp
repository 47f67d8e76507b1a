// Projections used by the proximal steps: box, shifted PSD cone, convex
// quadratic sets and SOS-convex sets. The last two are solved as SDPs.
#pragma once

#include "arpdps/conic.hpp"
#include "arpdps/linalg.hpp"
#include "arpdps/polycore.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace arpdps {

/// xᵀAx + bᵀx + r ≤ 0 with A ⪰ 0.
struct QuadraticConstraint {
  Mat a;
  Vec b;
  double r = 0.0;
};

struct QuadraticSet {
  int dim = 0;
  std::vector<QuadraticConstraint> constraints;

  /// Shapes, finiteness and A ⪰ 0 (eigenvalues ≥ −1e-10).
  void validate() const;
};

/// {x : g_j(x) ≤ 0 ∀j} with SOS-convex g_j.
struct SosConvexSet {
  int dim = 0;
  std::vector<Polynomial> gs;
  int omega = 2;
  std::optional<Vec> slater_point;

  /// Fills ω as the smallest even integer ≥ max(2, max deg g_j).
  static SosConvexSet make(int dim, std::vector<Polynomial> gs, std::optional<Vec> slater = std::nullopt);
  void validate() const;
  bool contains(const Vec& x, double tol = 0.0) const;
};

struct ProjectionResult {
  Vec point;
  SdpStatus status = SdpStatus::error;
  double distance2 = 0.0;       ///< primal objective ‖v − P(v)‖² as reported by the SDP
  double dual_objective = 0.0;  ///< SDP dual objective
  double gap = 0.0;
  int inner_iterations = 0;
  /// Pseudo-moment vector over the reduced coordinates (moment route only),
  /// indexed by `moment_basis`.
  Vec moments;
  std::optional<MonomialBasis> moment_basis;
  std::vector<int> active_coords;  ///< coordinates that entered the SDP
  Vec sdp_point;                   ///< first-order moments before the polish
  bool polished = false;           ///< KKT Newton polish accepted
  std::string message;

  bool ok() const { return status == SdpStatus::optimal; }
};

/// Componentwise clamp; throws when lo > hi somewhere.
Vec project_box(const Vec& v, const Vec& lo, const Vec& hi);

/// B + P_{S+}(Ψ − B).
SymMat project_shifted_psd(const SymMat& psi, const SymMat& b);
Mat project_shifted_psd(const Mat& psi, const Mat& b);

/// Projection onto a convex quadratic set through the lifted SDP
///   min tr S − 2vᵀu + ‖v‖²  s.t. [[1, uᵀ], [u, S]] ⪰ 0, tr(A_j S) + b_jᵀu + r_j ≤ 0.
ProjectionResult project_quadratic_set(const Vec& v, const QuadraticSet& set, const SdpBackend& backend,
                                       double tol = kDefaultInnerTol);

/// Projection onto an SOS-convex set through the moment SDP
///   min L_y(‖v − x‖²)  s.t. L_y(g_j) ≤ 0, Σ_α y_α B_α ⪰ 0, y_0 = 1,
/// returning the first-order moments. Coordinates absent from every g_j pass
/// through unchanged. Throws when the stored Slater point is not strictly
/// feasible unless `waive_slater`.
ProjectionResult project_sos_convex(const Vec& v, const SosConvexSet& set, const SdpBackend& backend,
                                    double tol = kDefaultInnerTol, bool waive_slater = false);

/// Reusable projector onto an SOS-convex set. The SDP skeleton is built once;
/// only the objective changes between calls. Degree-≤2 sets use the quadratic
/// lifting, everything else the moment SDP. The SDP point is refined by a few
/// Newton steps on the KKT system over the constraints it leaves (nearly)
/// tight; the refinement is dropped unless it stays feasible and nearby.
/// Not thread-safe: the previous
/// solution is kept as a warm-start hint.
class SetProjector {
 public:
  enum class Route { automatic, moments };

  SetProjector(SosConvexSet set, std::shared_ptr<const SdpBackend> backend, double tol = kDefaultInnerTol,
               bool warm_start = false, bool waive_slater = false, Route route = Route::automatic);

  ProjectionResult project(const Vec& v);
  const SosConvexSet& set() const { return set_; }
  bool uses_moments() const { return moment_; }

 private:
  SosConvexSet set_;
  std::shared_ptr<const SdpBackend> backend_;
  double tol_;
  bool warm_start_;
  bool moment_ = false;
  std::vector<int> active_;  // coordinates entering the SDP
  std::vector<Polynomial> reduced_;
  SdpProblem skeleton_;      // constraints only
  // Moment route: canonical positions of moments and objective positions.
  std::optional<MomentMatrixSet> mm_;
  std::vector<std::pair<int, int>> first_order_pos_;
  std::vector<std::pair<int, int>> second_order_pos_;
  std::optional<SdpSolution> last_;
};

/// Reference projection for small smooth problems; independent of the SDP path.
struct OracleConfig {
  int max_outer = 200;
  int max_inner = 5000;
  double tol = 1e-10;
  double fd_step = 1e-6;
};

struct ConstraintHandle {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
};

struct OracleResult {
  Vec point;
  bool converged = false;
  double kkt_residual = 0.0;
};

/// Augmented-Lagrangian gradient method followed by a Newton polish on the
/// active KKT system (finite-difference Hessians).
OracleResult oracle_project(const Vec& v, const std::vector<ConstraintHandle>& constraints,
                            const OracleConfig& cfg = {});

/// Constraint handles for polynomial constraints.
std::vector<ConstraintHandle> handles_from(const std::vector<Polynomial>& gs);

}  // namespace arpdps
