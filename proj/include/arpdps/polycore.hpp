// Multivariate polynomials, graded-lex monomial bases and moment matrices.
#pragma once

#include "arpdps/linalg.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace arpdps {

class SdpBackend;

/// Exponent tuple α = (α_1, ..., α_d).
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> exponents);
  static MultiIndex zero(int dim) { return MultiIndex(std::vector<int>(static_cast<std::size_t>(dim), 0)); }
  static MultiIndex unit(int dim, int i);

  int dim() const { return static_cast<int>(exps_.size()); }
  int degree() const { return degree_; }
  int operator[](int i) const { return exps_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& exponents() const { return exps_; }

  MultiIndex operator+(const MultiIndex& o) const;
  bool operator==(const MultiIndex& o) const = default;

  /// x^α
  double monomial(const Eigen::Ref<const Vec>& x) const;

 private:
  std::vector<int> exps_;
  int degree_ = 0;
};

/// Graded-lex order: total degree ascending, then lexicographically
/// descending exponents, so (1, x1, ..., xd, x1², x1x2, ..., xd², ...).
struct GradedLex {
  bool operator()(const MultiIndex& a, const MultiIndex& b) const;
};

/// Sparse real polynomial in `dim` variables. Zero coefficients are never stored.
class Polynomial {
 public:
  using Terms = std::map<MultiIndex, double, GradedLex>;

  Polynomial() = default;
  explicit Polynomial(int dim);
  Polynomial(int dim, const std::vector<std::pair<std::vector<int>, double>>& terms);

  static Polynomial constant(int dim, double c);
  static Polynomial variable(int dim, int i);
  /// ‖v − x‖²
  static Polynomial squared_distance(const Vec& v);

  int dim() const { return dim_; }
  int degree() const;
  bool is_zero() const { return terms_.empty(); }
  const Terms& terms() const { return terms_; }

  double coeff(const MultiIndex& a) const;
  void add_term(const MultiIndex& a, double c);

  double eval(const Eigen::Ref<const Vec>& x) const;
  Vec gradient(const Eigen::Ref<const Vec>& x) const;
  Polynomial derivative(int i) const;
  /// Variables with at least one nonzero exponent.
  std::vector<int> support() const;
  /// Re-expresses the polynomial over `new_dim` variables, variable i mapping to `index_map[i]`.
  Polynomial embed(int new_dim, const std::vector<int>& index_map) const;
  /// Keeps only the variables in `keep` (which must cover the support), in that order.
  Polynomial restrict_to(const std::vector<int>& keep) const;

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  Polynomial& operator*=(double s);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  bool operator==(const Polynomial& o) const { return dim_ == o.dim_ && terms_ == o.terms_; }

 private:
  int dim_ = 0;
  Terms terms_;
};

/// C(d+ω, ω), saturating at INT64_MAX.
std::int64_t basis_size(int d, int omega);

/// Largest basis the library will build; protects against accidental huge moment systems.
inline constexpr std::int64_t kMaxBasisSize = 50'000;

/// All α with |α| ≤ ω in graded-lex order.
class MonomialBasis {
 public:
  MonomialBasis() = default;
  MonomialBasis(int dim, int max_degree);

  int dim() const { return dim_; }
  int max_degree() const { return max_degree_; }
  std::size_t size() const { return entries_.size(); }
  const MultiIndex& operator[](std::size_t i) const { return entries_[i]; }
  const std::vector<MultiIndex>& entries() const { return entries_; }
  std::optional<std::size_t> index_of(const MultiIndex& a) const;

  /// y(x) = (x^β)_β
  Vec evaluate(const Eigen::Ref<const Vec>& x) const;

 private:
  int dim_ = 0;
  int max_degree_ = 0;
  std::vector<MultiIndex> entries_;
  std::map<MultiIndex, std::size_t, GradedLex> lookup_;
};

MonomialBasis enumerate_basis(int d, int omega);

/// B_α over the half-degree basis: Σ_α B_α x^α = y(x) y(x)ᵀ with y(x) the
/// basis of degree ω/2. Each B_α is a symmetric 0/1 pattern.
class MomentMatrixSet {
 public:
  MomentMatrixSet(int d, int omega);

  int dim() const { return full_.dim(); }
  int omega() const { return full_.max_degree(); }
  const MonomialBasis& half_basis() const { return half_; }
  const MonomialBasis& full_basis() const { return full_; }

  /// Basis-index pairs (i, j), i ≤ j, with β_i + β_j = α_k for full-basis index k.
  const std::vector<std::pair<int, int>>& pairs(std::size_t k) const { return pairs_[k]; }
  /// Representative position of α_k inside the moment matrix.
  std::pair<int, int> canonical_pair(std::size_t k) const { return pairs_[k].front(); }

  SymMat matrix(const MultiIndex& a) const;
  SymMat matrix(std::size_t k) const;
  /// Σ_α y_α B_α for y indexed by the full basis.
  Mat assemble(const Eigen::Ref<const Vec>& y) const;

 private:
  MonomialBasis half_;
  MonomialBasis full_;
  std::vector<std::vector<std::pair<int, int>>> pairs_;
};

MomentMatrixSet moment_matrices(int d, int omega);

/// L_y(p) = Σ_α p_α y_α with y indexed by `basis`.
double riesz(const Polynomial& p, const MonomialBasis& basis, const Eigen::Ref<const Vec>& y);

/// Gap polynomial g(v) − g(x) − ∇g(x)ᵀ(v − x) over (v, x) ∈ R^{2d}.
Polynomial convexity_gap(const Polynomial& g);

struct SosConvexityResult {
  bool certified = false;
  /// Gram matrix Q with gap = m(h, x)ᵀ Q m(h, x), h = v − x.
  Mat gram;
  /// Monomials m over (h, x) ∈ R^{2d} indexing the rows of `gram`.
  std::vector<MultiIndex> gram_monomials;
  std::string status;  ///< backend status text
};

/// Looks for an SOS Gram certificate of the convexity gap at its natural degree.
/// The gap is rewritten in (h, x) = (v − x, x), which keeps SOS-ness and lets
/// the Gram basis skip monomials free of h. A refutation means no certificate
/// at that degree, not non-convexity.
SosConvexityResult verify_sos_convex(const Polynomial& g, const SdpBackend& backend, double tol = 1e-8);

}  // namespace arpdps
