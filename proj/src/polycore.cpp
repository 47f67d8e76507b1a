#include "arpdps/polycore.hpp"

#include "arpdps/conic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace arpdps {

// ---- MultiIndex -------------------------------------------------------------

MultiIndex::MultiIndex(std::vector<int> exponents) : exps_(std::move(exponents)) {
  for (int e : exps_) {
    if (e < 0) throw std::invalid_argument("MultiIndex: negative exponent");
    degree_ += e;
  }
}

MultiIndex MultiIndex::unit(int dim, int i) {
  std::vector<int> e(static_cast<std::size_t>(dim), 0);
  e.at(static_cast<std::size_t>(i)) = 1;
  return MultiIndex(std::move(e));
}

MultiIndex MultiIndex::operator+(const MultiIndex& o) const {
  if (o.dim() != dim()) throw std::invalid_argument("MultiIndex: dimension mismatch");
  std::vector<int> e(exps_);
  for (std::size_t i = 0; i < e.size(); ++i) e[i] += o.exps_[i];
  return MultiIndex(std::move(e));
}

double MultiIndex::monomial(const Eigen::Ref<const Vec>& x) const {
  double v = 1.0;
  for (std::size_t i = 0; i < exps_.size(); ++i)
    for (int p = 0; p < exps_[i]; ++p) v *= x[static_cast<Index>(i)];
  return v;
}

bool GradedLex::operator()(const MultiIndex& a, const MultiIndex& b) const {
  if (a.degree() != b.degree()) return a.degree() < b.degree();
  return a.exponents() > b.exponents();
}

// ---- Polynomial -------------------------------------------------------------

Polynomial::Polynomial(int dim) : dim_(dim) {
  if (dim < 1) throw std::invalid_argument("Polynomial: dimension must be positive");
}

Polynomial::Polynomial(int dim, const std::vector<std::pair<std::vector<int>, double>>& terms) : Polynomial(dim) {
  for (const auto& [e, c] : terms) {
    if (static_cast<int>(e.size()) != dim) throw std::invalid_argument("Polynomial: exponent length mismatch");
    add_term(MultiIndex(e), c);
  }
}

Polynomial Polynomial::constant(int dim, double c) {
  Polynomial p(dim);
  p.add_term(MultiIndex::zero(dim), c);
  return p;
}

Polynomial Polynomial::variable(int dim, int i) {
  Polynomial p(dim);
  p.add_term(MultiIndex::unit(dim, i), 1.0);
  return p;
}

Polynomial Polynomial::squared_distance(const Vec& v) {
  const int d = static_cast<int>(v.size());
  Polynomial p(d);
  p.add_term(MultiIndex::zero(d), v.squaredNorm());
  for (int i = 0; i < d; ++i) {
    std::vector<int> e(static_cast<std::size_t>(d), 0);
    e[static_cast<std::size_t>(i)] = 1;
    p.add_term(MultiIndex(e), -2.0 * v[i]);
    e[static_cast<std::size_t>(i)] = 2;
    p.add_term(MultiIndex(e), 1.0);
  }
  return p;
}

int Polynomial::degree() const {
  int deg = 0;
  for (const auto& [a, c] : terms_) deg = std::max(deg, a.degree());
  return deg;
}

double Polynomial::coeff(const MultiIndex& a) const {
  auto it = terms_.find(a);
  return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial::add_term(const MultiIndex& a, double c) {
  if (a.dim() != dim_) throw std::invalid_argument("Polynomial: term dimension mismatch");
  if (!std::isfinite(c)) throw std::invalid_argument("Polynomial: non-finite coefficient");
  if (c == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(a, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

double Polynomial::eval(const Eigen::Ref<const Vec>& x) const {
  if (x.size() != dim_) throw std::invalid_argument("Polynomial::eval: dimension mismatch");
  double s = 0.0;
  for (const auto& [a, c] : terms_) s += c * a.monomial(x);
  return s;
}

Polynomial Polynomial::derivative(int i) const {
  Polynomial d(dim_);
  for (const auto& [a, c] : terms_) {
    const int e = a[i];
    if (e == 0) continue;
    std::vector<int> ex = a.exponents();
    ex[static_cast<std::size_t>(i)] -= 1;
    d.add_term(MultiIndex(std::move(ex)), c * e);
  }
  return d;
}

Vec Polynomial::gradient(const Eigen::Ref<const Vec>& x) const {
  if (x.size() != dim_) throw std::invalid_argument("Polynomial::gradient: dimension mismatch");
  Vec g = Vec::Zero(dim_);
  for (const auto& [a, c] : terms_) {
    for (int i = 0; i < dim_; ++i) {
      const int e = a[i];
      if (e == 0) continue;
      double m = c * e;
      for (int j = 0; j < dim_; ++j) {
        const int p = (j == i) ? e - 1 : a[j];
        for (int k = 0; k < p; ++k) m *= x[j];
      }
      g[i] += m;
    }
  }
  return g;
}

std::vector<int> Polynomial::support() const {
  std::vector<int> s;
  for (int i = 0; i < dim_; ++i) {
    for (const auto& [a, c] : terms_) {
      if (a[i] != 0) {
        s.push_back(i);
        break;
      }
    }
  }
  return s;
}

Polynomial Polynomial::embed(int new_dim, const std::vector<int>& index_map) const {
  if (static_cast<int>(index_map.size()) != dim_) throw std::invalid_argument("Polynomial::embed: map size mismatch");
  Polynomial p(new_dim);
  for (const auto& [a, c] : terms_) {
    std::vector<int> e(static_cast<std::size_t>(new_dim), 0);
    for (int i = 0; i < dim_; ++i) e.at(static_cast<std::size_t>(index_map[static_cast<std::size_t>(i)])) += a[i];
    p.add_term(MultiIndex(std::move(e)), c);
  }
  return p;
}

Polynomial Polynomial::restrict_to(const std::vector<int>& keep) const {
  Polynomial p(static_cast<int>(keep.size()));
  for (const auto& [a, c] : terms_) {
    std::vector<int> e;
    e.reserve(keep.size());
    int kept = 0;
    for (int i : keep) {
      e.push_back(a[i]);
      kept += a[i];
    }
    if (kept != a.degree()) throw std::invalid_argument("Polynomial::restrict_to: dropped variable in support");
    p.add_term(MultiIndex(std::move(e)), c);
  }
  return p;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  if (o.dim_ != dim_) throw std::invalid_argument("Polynomial: dimension mismatch");
  for (const auto& [a, c] : o.terms_) add_term(a, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  if (o.dim_ != dim_) throw std::invalid_argument("Polynomial: dimension mismatch");
  for (const auto& [a, c] : o.terms_) add_term(a, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [a, c] : terms_) c *= s;
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("Polynomial: dimension mismatch");
  Polynomial p(a.dim());
  for (const auto& [ea, ca] : a.terms())
    for (const auto& [eb, cb] : b.terms()) p.add_term(ea + eb, ca * cb);
  return p;
}

// ---- bases ------------------------------------------------------------------

std::int64_t basis_size(int d, int omega) {
  // C(d+ω, ω) = Π_{i=1..ω} (d+i)/i, exact at every step.
  constexpr auto kMax = std::numeric_limits<std::int64_t>::max();
  std::int64_t r = 1;
  for (int i = 1; i <= omega; ++i) {
    const std::int64_t num = d + i;
    if (r > kMax / num) return kMax;
    r = r * num / i;
  }
  return r;
}

namespace {

void compositions(int remaining, int pos, std::vector<int>& cur, std::vector<MultiIndex>& out) {
  const int d = static_cast<int>(cur.size());
  if (pos == d - 1) {
    cur[static_cast<std::size_t>(pos)] = remaining;
    out.emplace_back(cur);
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    cur[static_cast<std::size_t>(pos)] = e;
    compositions(remaining - e, pos + 1, cur, out);
  }
}

}  // namespace

MonomialBasis::MonomialBasis(int dim, int max_degree) : dim_(dim), max_degree_(max_degree) {
  if (dim < 1) throw std::invalid_argument("MonomialBasis: dimension must be positive");
  if (max_degree < 0) throw std::invalid_argument("MonomialBasis: negative degree");
  const auto count = basis_size(dim, max_degree);
  if (count > kMaxBasisSize)
    throw std::invalid_argument("MonomialBasis: s(" + std::to_string(dim) + "," + std::to_string(max_degree) +
                                ") = " + std::to_string(count) + " exceeds the cap of " +
                                std::to_string(kMaxBasisSize));
  entries_.reserve(static_cast<std::size_t>(count));
  std::vector<int> cur(static_cast<std::size_t>(dim), 0);
  for (int t = 0; t <= max_degree; ++t) compositions(t, 0, cur, entries_);
  for (std::size_t i = 0; i < entries_.size(); ++i) lookup_.emplace(entries_[i], i);
}

std::optional<std::size_t> MonomialBasis::index_of(const MultiIndex& a) const {
  auto it = lookup_.find(a);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

Vec MonomialBasis::evaluate(const Eigen::Ref<const Vec>& x) const {
  if (x.size() != dim_) throw std::invalid_argument("MonomialBasis::evaluate: dimension mismatch");
  Vec y(static_cast<Index>(entries_.size()));
  for (std::size_t i = 0; i < entries_.size(); ++i) y[static_cast<Index>(i)] = entries_[i].monomial(x);
  return y;
}

MonomialBasis enumerate_basis(int d, int omega) { return MonomialBasis(d, omega); }

// ---- moment matrices ----------------------------------------------------------

MomentMatrixSet::MomentMatrixSet(int d, int omega) {
  if (omega < 2 || omega % 2 != 0) throw std::invalid_argument("moment_matrices: omega must be even and >= 2");
  half_ = MonomialBasis(d, omega / 2);
  full_ = MonomialBasis(d, omega);
  pairs_.assign(full_.size(), {});
  for (std::size_t i = 0; i < half_.size(); ++i) {
    for (std::size_t j = i; j < half_.size(); ++j) {
      const auto k = full_.index_of(half_[i] + half_[j]);
      pairs_[*k].emplace_back(static_cast<int>(i), static_cast<int>(j));
    }
  }
}

SymMat MomentMatrixSet::matrix(std::size_t k) const {
  SymMat b(static_cast<Index>(half_.size()));
  for (auto [i, j] : pairs_.at(k)) b(j, i) = 1.0;
  return b;
}

SymMat MomentMatrixSet::matrix(const MultiIndex& a) const {
  const auto k = full_.index_of(a);
  if (!k) throw std::invalid_argument("MomentMatrixSet: multi-index outside the basis");
  return matrix(*k);
}

Mat MomentMatrixSet::assemble(const Eigen::Ref<const Vec>& y) const {
  if (static_cast<std::size_t>(y.size()) != full_.size())
    throw std::invalid_argument("MomentMatrixSet::assemble: moment vector length mismatch");
  const auto n = static_cast<Index>(half_.size());
  Mat m = Mat::Zero(n, n);
  for (std::size_t k = 0; k < pairs_.size(); ++k)
    for (auto [i, j] : pairs_[k]) m(i, j) = m(j, i) = y[static_cast<Index>(k)];
  return m;
}

MomentMatrixSet moment_matrices(int d, int omega) { return MomentMatrixSet(d, omega); }

double riesz(const Polynomial& p, const MonomialBasis& basis, const Eigen::Ref<const Vec>& y) {
  double s = 0.0;
  for (const auto& [a, c] : p.terms()) {
    const auto k = basis.index_of(a);
    if (!k) throw std::invalid_argument("riesz: polynomial degree exceeds the moment basis");
    s += c * y[static_cast<Index>(*k)];
  }
  return s;
}

// ---- SOS-convexity ------------------------------------------------------------

Polynomial convexity_gap(const Polynomial& g) {
  const int d = g.dim();
  std::vector<int> v_map(static_cast<std::size_t>(d)), x_map(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    v_map[static_cast<std::size_t>(i)] = i;
    x_map[static_cast<std::size_t>(i)] = d + i;
  }
  Polynomial gap = g.embed(2 * d, v_map) - g.embed(2 * d, x_map);
  for (int i = 0; i < d; ++i) {
    const Polynomial diff = Polynomial::variable(2 * d, i) - Polynomial::variable(2 * d, d + i);
    gap -= g.derivative(i).embed(2 * d, x_map) * diff;
  }
  return gap;
}

namespace {

Polynomial int_power(const Polynomial& p, int e) {
  Polynomial r = Polynomial::constant(p.dim(), 1.0);
  for (int i = 0; i < e; ++i) r = r * p;
  return r;
}

// g(x + h) − g(x) − ∇g(x)ᵀh over (h, x); the same polynomial as the convexity
// gap after the invertible substitution v = x + h.
Polynomial shifted_gap(const Polynomial& g) {
  const int d = g.dim();
  const int n = 2 * d;
  std::vector<Polynomial> shifted;
  for (int i = 0; i < d; ++i) shifted.push_back(Polynomial::variable(n, i) + Polynomial::variable(n, d + i));
  Polynomial g_shift(n);
  for (const auto& [a, c] : g.terms()) {
    Polynomial t = Polynomial::constant(n, c);
    for (int i = 0; i < d; ++i)
      if (a[i] > 0) t = t * int_power(shifted[static_cast<std::size_t>(i)], a[i]);
    g_shift += t;
  }
  std::vector<int> x_map(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) x_map[static_cast<std::size_t>(i)] = d + i;
  Polynomial gap = g_shift - g.embed(n, x_map);
  for (int i = 0; i < d; ++i) gap -= g.derivative(i).embed(n, x_map) * Polynomial::variable(n, i);
  return gap;
}

}  // namespace

SosConvexityResult verify_sos_convex(const Polynomial& g, const SdpBackend& backend, double tol) {
  SosConvexityResult out;
  const int d = g.dim();
  const Polynomial gap = shifted_gap(g);
  if (gap.is_zero()) {
    out.certified = true;
    out.gram = Mat::Zero(0, 0);
    out.status = "trivial";
    return out;
  }
  int dmin = std::numeric_limits<int>::max();
  int dmax = 0;
  for (const auto& [a, c] : gap.terms()) {
    dmin = std::min(dmin, a.degree());
    dmax = std::max(dmax, a.degree());
  }
  if (dmax % 2 != 0 || dmin % 2 != 0) {
    out.status = "odd-degree gap";
    return out;
  }
  const MonomialBasis full(2 * d, dmax / 2);
  // Gram basis: monomials with h-degree >= 1 and degree in [dmin/2, dmax/2].
  std::vector<MultiIndex> basis;
  for (const auto& b : full.entries()) {
    int hdeg = 0;
    for (int i = 0; i < d; ++i) hdeg += b[i];
    if (hdeg >= 1 && 2 * b.degree() >= dmin) basis.push_back(b);
  }
  const int n = static_cast<int>(basis.size());
  out.gram_monomials = basis;

  std::map<MultiIndex, std::vector<std::pair<int, int>>, GradedLex> products;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      products[basis[static_cast<std::size_t>(i)] + basis[static_cast<std::size_t>(j)]].emplace_back(i, j);
  for (const auto& [a, c] : gap.terms()) {
    if (!products.count(a)) {
      out.status = "gap term outside the Gram support";
      return out;
    }
  }

  SdpProblem p;
  p.psd_blocks = {n};
  for (int i = 0; i < n; ++i) p.objective.add(0, i, i, 1.0);
  for (const auto& [a, prs] : products) {
    LinearConstraint c;
    // Off-diagonal Q(i,j) appears twice in m m^T.
    for (auto [i, j] : prs) c.lhs.add(0, i, j, i == j ? 1.0 : 2.0);
    c.rhs = gap.coeff(a);
    p.eq_constraints.push_back(std::move(c));
  }

  const SdpSolution sol = backend.solve(p, tol);
  out.status = to_string(sol.status);
  if (sol.status == SdpStatus::optimal || sol.status == SdpStatus::inaccurate) {
    out.gram = sol.block_values.front();
    const double slack = std::sqrt(tol);
    out.certified = min_eigenvalue(out.gram) >= -slack && sol.primal_residual <= slack;
  }
  return out;
}

}  // namespace arpdps
