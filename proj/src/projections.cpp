#include "arpdps/projections.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>

namespace arpdps {

void QuadraticSet::validate() const {
  if (dim < 1) throw std::invalid_argument("QuadraticSet: dimension must be positive");
  for (std::size_t j = 0; j < constraints.size(); ++j) {
    const auto& c = constraints[j];
    if (c.a.rows() != dim || c.a.cols() != dim || c.b.size() != dim)
      throw std::invalid_argument("QuadraticSet: constraint " + std::to_string(j) + " has the wrong shape");
    if (!c.a.allFinite() || !c.b.allFinite() || !std::isfinite(c.r))
      throw std::invalid_argument("QuadraticSet: non-finite data");
    if ((c.a - c.a.transpose()).norm() > 1e-12 * (1.0 + c.a.norm()))
      throw std::invalid_argument("QuadraticSet: A is not symmetric");
    if (min_eigenvalue(c.a) < -1e-10) throw std::invalid_argument("QuadraticSet: A is not PSD");
  }
}

SosConvexSet SosConvexSet::make(int dim, std::vector<Polynomial> gs, std::optional<Vec> slater) {
  SosConvexSet s;
  s.dim = dim;
  int deg = 2;
  for (const auto& g : gs) deg = std::max(deg, g.degree());
  s.omega = deg + (deg % 2);
  s.gs = std::move(gs);
  s.slater_point = std::move(slater);
  s.validate();
  return s;
}

void SosConvexSet::validate() const {
  if (dim < 1) throw std::invalid_argument("SosConvexSet: dimension must be positive");
  if (omega < 2 || omega % 2 != 0) throw std::invalid_argument("SosConvexSet: omega must be even and >= 2");
  for (const auto& g : gs) {
    if (g.dim() != dim) throw std::invalid_argument("SosConvexSet: polynomial dimension mismatch");
    if (g.degree() > omega) throw std::invalid_argument("SosConvexSet: omega below a constraint degree");
  }
  if (slater_point && slater_point->size() != dim) throw std::invalid_argument("SosConvexSet: Slater point length mismatch");
}

bool SosConvexSet::contains(const Vec& x, double tol) const {
  return std::all_of(gs.begin(), gs.end(), [&](const Polynomial& g) { return g.eval(x) <= tol; });
}

Vec project_box(const Vec& v, const Vec& lo, const Vec& hi) {
  if (lo.size() != v.size() || hi.size() != v.size()) throw std::invalid_argument("project_box: length mismatch");
  if ((lo.array() > hi.array()).any()) throw std::invalid_argument("project_box: lower bound exceeds upper bound");
  return v.cwiseMax(lo).cwiseMin(hi);
}

Mat project_shifted_psd(const Mat& psi, const Mat& b) {
  if (psi.rows() != b.rows() || psi.cols() != b.cols()) throw std::invalid_argument("project_shifted_psd: dimension mismatch");
  return b + project_psd(Mat(psi - b));
}

SymMat project_shifted_psd(const SymMat& psi, const SymMat& b) {
  if (psi.n() != b.n()) throw std::invalid_argument("project_shifted_psd: dimension mismatch");
  return b + project_psd(psi - b);
}

namespace {

// tr(A S) + bᵀu over the block [[1, uᵀ], [u, S]].
LinearFunctional lifted_quadratic(const Mat& a, const Vec& b) {
  LinearFunctional f;
  const Index n = a.rows();
  for (Index j = 0; j < n; ++j) {
    if (a(j, j) != 0.0) f.add(0, static_cast<int>(1 + j), static_cast<int>(1 + j), a(j, j));
    for (Index i = j + 1; i < n; ++i)
      if (a(i, j) != 0.0) f.add(0, static_cast<int>(1 + i), static_cast<int>(1 + j), 2.0 * a(i, j));
    if (b[j] != 0.0) f.add(0, static_cast<int>(1 + j), 0, b[j]);
  }
  return f;
}

SdpProblem quadratic_skeleton(const QuadraticSet& set) {
  SdpProblem p;
  p.psd_blocks = {set.dim + 1};
  LinearConstraint one;
  one.lhs.add(0, 0, 0, 1.0);
  one.rhs = 1.0;
  p.eq_constraints.push_back(std::move(one));
  for (const auto& c : set.constraints) p.ineq_constraints.push_back({lifted_quadratic(c.a, c.b), -c.r});
  return p;
}

void quadratic_objective(SdpProblem& p, const Vec& v) {
  p.objective = LinearFunctional{};
  for (Index i = 0; i < v.size(); ++i) {
    p.objective.add(0, static_cast<int>(1 + i), static_cast<int>(1 + i), 1.0);
    if (v[i] != 0.0) p.objective.add(0, static_cast<int>(1 + i), 0, -2.0 * v[i]);
  }
  p.objective_offset = v.squaredNorm();
}

QuadraticConstraint as_quadratic(const Polynomial& g) {
  const int n = g.dim();
  QuadraticConstraint c{Mat::Zero(n, n), Vec::Zero(n), 0.0};
  for (const auto& [a, coeff] : g.terms()) {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
      for (int e = 0; e < a[i]; ++e) idx.push_back(i);
    if (idx.empty()) {
      c.r += coeff;
    } else if (idx.size() == 1) {
      c.b[idx[0]] += coeff;
    } else if (idx[0] == idx[1]) {
      c.a(idx[0], idx[0]) += coeff;
    } else {
      c.a(idx[0], idx[1]) += 0.5 * coeff;
      c.a(idx[1], idx[0]) += 0.5 * coeff;
    }
  }
  return c;
}

// Newton on  x − v + Σ μ_j ∇g_j(x) = 0,  g_j(x) = 0 (j tight at p).
std::optional<Vec> kkt_polish(const std::vector<Polynomial>& gs, const Vec& v, const Vec& p, double gap) {
  const Index n = p.size();
  const double scale = 1.0 + v.norm();
  std::vector<std::size_t> act;
  for (std::size_t j = 0; j < gs.size(); ++j)
    if (gs[j].eval(p) > -1e-5 * scale) act.push_back(j);
  const auto na = static_cast<Index>(act.size());
  const double reach = std::max(1e-3, 100.0 * std::sqrt(std::abs(gap))) * scale;
  auto feasible = [&](const Vec& x) {
    for (const auto& g : gs)
      if (g.eval(x) > 1e-10 * scale) return false;
    return true;
  };
  if (na == 0) {
    if ((v - p).norm() <= reach && feasible(v)) return v;
    return std::nullopt;
  }
  std::vector<std::vector<Polynomial>> hess(act.size());
  for (std::size_t a = 0; a < act.size(); ++a)
    for (Index i = 0; i < n; ++i) hess[a].push_back(gs[act[a]].derivative(static_cast<int>(i)));

  Vec x = p;
  Mat gt(n, na);
  auto grads = [&](const Vec& at) {
    for (Index a = 0; a < na; ++a) gt.col(a) = gs[act[static_cast<std::size_t>(a)]].gradient(at);
  };
  grads(x);
  Vec mu = gt.colPivHouseholderQr().solve(Vec(v - x));
  auto residual = [&](const Vec& at, const Vec& m) {
    grads(at);
    Vec f(n + na);
    f.head(n) = at - v + gt * m;
    for (Index a = 0; a < na; ++a) f[n + a] = gs[act[static_cast<std::size_t>(a)]].eval(at);
    return f;
  };
  Vec f = residual(x, mu);
  for (int it = 0; it < 30 && f.norm() > 1e-14 * scale; ++it) {
    Mat jac = Mat::Zero(n + na, n + na);
    jac.topLeftCorner(n, n).setIdentity();
    for (Index a = 0; a < na; ++a)
      for (Index i = 0; i < n; ++i)
        jac.block(0, i, n, 1) += mu[a] * hess[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)].gradient(x);
    jac.topRightCorner(n, na) = gt;
    jac.bottomLeftCorner(na, n) = gt.transpose();
    const Vec step = jac.fullPivLu().solve(Vec(-f));
    if (!step.allFinite()) return std::nullopt;
    x += step.head(n);
    mu += step.tail(na);
    f = residual(x, mu);
  }
  if (!(f.norm() <= 1e-10 * scale) || (mu.array() < -1e-10).any() || (x - p).norm() > reach) return std::nullopt;
  if (!feasible(x)) return std::nullopt;
  return x;
}

void fill_from_solution(ProjectionResult& out, const SdpSolution& sol) {
  out.status = sol.status;
  out.distance2 = sol.objective_value;
  out.dual_objective = sol.dual_objective_value;
  out.gap = sol.gap;
  out.inner_iterations = sol.iterations;
  out.message = sol.message;
}

}  // namespace

ProjectionResult project_quadratic_set(const Vec& v, const QuadraticSet& set, const SdpBackend& backend, double tol) {
  set.validate();
  if (v.size() != set.dim) throw std::invalid_argument("project_quadratic_set: point length mismatch");
  SdpProblem p = quadratic_skeleton(set);
  quadratic_objective(p, v);
  const SdpSolution sol = solve_sdp(p, tol, &backend);
  ProjectionResult out;
  fill_from_solution(out, sol);
  out.active_coords.resize(static_cast<std::size_t>(set.dim));
  for (int i = 0; i < set.dim; ++i) out.active_coords[static_cast<std::size_t>(i)] = i;
  out.point = v;
  if (sol.status == SdpStatus::optimal || sol.status == SdpStatus::inaccurate)
    out.point = sol.block_values[0].col(0).tail(set.dim);
  return out;
}

SetProjector::SetProjector(SosConvexSet set, std::shared_ptr<const SdpBackend> backend, double tol, bool warm_start,
                           bool waive_slater, Route route)
    : set_(std::move(set)), backend_(std::move(backend)), tol_(tol), warm_start_(warm_start) {
  set_.validate();
  if (!backend_) backend_ = default_backend();
  if (set_.slater_point) {
    for (const auto& g : set_.gs)
      if (g.eval(*set_.slater_point) > -1e-9 && !waive_slater)
        throw std::invalid_argument("SetProjector: stored Slater point is not strictly feasible");
  }

  std::set<int> active;
  int maxdeg = 0;
  for (const auto& g : set_.gs) {
    for (int i : g.support()) active.insert(i);
    maxdeg = std::max(maxdeg, g.degree());
  }
  active_.assign(active.begin(), active.end());
  if (active_.empty()) return;
  const int n = static_cast<int>(active_.size());
  for (const auto& g : set_.gs) reduced_.push_back(g.restrict_to(active_));
  const auto& reduced = reduced_;

  if (maxdeg <= 2 && route == Route::automatic) {
    QuadraticSet qs;
    qs.dim = n;
    for (const auto& g : reduced) qs.constraints.push_back(as_quadratic(g));
    qs.validate();
    skeleton_ = quadratic_skeleton(qs);
    return;
  }

  moment_ = true;
  mm_.emplace(n, set_.omega);
  const auto& full = mm_->full_basis();
  SdpProblem p;
  p.psd_blocks = {static_cast<int>(mm_->half_basis().size())};
  LinearConstraint one;
  one.lhs.add(0, 0, 0, 1.0);
  one.rhs = 1.0;
  p.eq_constraints.push_back(std::move(one));
  // Hankel structure: every pair mapping to the same α carries the same moment.
  for (std::size_t k = 0; k < full.size(); ++k) {
    const auto& prs = mm_->pairs(k);
    const auto [ci, cj] = prs.front();
    for (std::size_t t = 1; t < prs.size(); ++t) {
      LinearConstraint c;
      c.lhs.add(0, prs[t].second, prs[t].first, 1.0).add(0, cj, ci, -1.0);
      p.eq_constraints.push_back(std::move(c));
    }
  }
  for (const auto& g : reduced) {
    LinearConstraint c;
    for (const auto& [a, coeff] : g.terms()) {
      if (a.degree() == 0) {
        c.rhs -= coeff;
        continue;
      }
      const auto [ci, cj] = mm_->canonical_pair(*full.index_of(a));
      c.lhs.add(0, cj, ci, coeff);
    }
    p.ineq_constraints.push_back(std::move(c));
  }
  skeleton_ = std::move(p);
  for (int i = 0; i < n; ++i) {
    const auto e1 = MultiIndex::unit(n, i);
    first_order_pos_.push_back(mm_->canonical_pair(*full.index_of(e1)));
    second_order_pos_.push_back(mm_->canonical_pair(*full.index_of(e1 + e1)));
  }
}

ProjectionResult SetProjector::project(const Vec& v) {
  if (v.size() != set_.dim) throw std::invalid_argument("SetProjector: point length mismatch");
  ProjectionResult out;
  out.active_coords = active_;
  out.point = v;
  if (active_.empty()) {
    // Only constant constraints: either everything or nothing is feasible.
    const bool feasible = set_.contains(v);
    out.status = feasible ? SdpStatus::optimal : SdpStatus::infeasible;
    out.message = feasible ? "no active coordinates" : "constant constraint is violated";
    return out;
  }
  const auto n = static_cast<Index>(active_.size());
  Vec va(n);
  for (Index i = 0; i < n; ++i) va[i] = v[active_[static_cast<std::size_t>(i)]];

  SdpProblem p = skeleton_;
  if (moment_) {
    for (Index i = 0; i < n; ++i) {
      const auto [si, sj] = second_order_pos_[static_cast<std::size_t>(i)];
      const auto [fi, fj] = first_order_pos_[static_cast<std::size_t>(i)];
      p.objective.add(0, sj, si, 1.0);
      if (va[i] != 0.0) p.objective.add(0, fj, fi, -2.0 * va[i]);
    }
    p.objective_offset = va.squaredNorm();
  } else {
    quadratic_objective(p, va);
  }
  if (warm_start_ && last_) p = warm_hint(std::move(p), *last_);

  const SdpSolution sol = solve_sdp(p, tol_, backend_.get());
  fill_from_solution(out, sol);
  if (!set_.slater_point) out.message += " (no Slater point supplied)";
  if (sol.status != SdpStatus::optimal && sol.status != SdpStatus::inaccurate) return out;
  if (warm_start_) last_ = sol;

  const Mat& x = sol.block_values[0];
  for (Index i = 0; i < n; ++i) {
    const auto [fi, fj] = moment_ ? first_order_pos_[static_cast<std::size_t>(i)]
                                  : std::pair<int, int>{0, static_cast<int>(1 + i)};
    out.point[active_[static_cast<std::size_t>(i)]] = x(fj, fi);
  }
  Vec pa(n);
  for (Index i = 0; i < n; ++i) pa[i] = out.point[active_[static_cast<std::size_t>(i)]];
  out.sdp_point = pa;
  if (auto polished = kkt_polish(reduced_, va, pa, sol.gap)) {
    for (Index i = 0; i < n; ++i) out.point[active_[static_cast<std::size_t>(i)]] = (*polished)[i];
    out.polished = true;
  }
  if (moment_) {
    const auto& full = mm_->full_basis();
    out.moments.resize(static_cast<Index>(full.size()));
    for (std::size_t k = 0; k < full.size(); ++k) {
      const auto [ci, cj] = mm_->canonical_pair(k);
      out.moments[static_cast<Index>(k)] = x(cj, ci);
    }
    out.moment_basis = full;
  }
  return out;
}

ProjectionResult project_sos_convex(const Vec& v, const SosConvexSet& set, const SdpBackend& backend, double tol,
                                    bool waive_slater) {
  std::shared_ptr<const SdpBackend> handle(&backend, [](const SdpBackend*) {});
  SetProjector proj(set, handle, tol, false, waive_slater, SetProjector::Route::moments);
  return proj.project(v);
}

}  // namespace arpdps
