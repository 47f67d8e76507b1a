// Dense symmetric matrix algebra shared by every solver layer.
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace arpdps {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Real symmetric matrix kept as packed lower-triangle storage, so symmetry
/// holds by construction. Column-major packing: (0,0),(1,0),...,(n-1,0),(1,1),...
class SymMat {
 public:
  SymMat() = default;
  explicit SymMat(Index n) : n_(n), data_(Vec::Zero(n * (n + 1) / 2)) {}

  /// Symmetrizes `m` as (m + mᵀ)/2.
  static SymMat from_dense(const Mat& m);
  static SymMat identity(Index n);
  static SymMat diagonal(const Vec& d);

  Index n() const { return n_; }
  double operator()(Index i, Index j) const { return data_[packed(i, j)]; }
  double& operator()(Index i, Index j) { return data_[packed(i, j)]; }

  Mat dense() const;
  const Vec& packed_data() const { return data_; }

  SymMat& operator+=(const SymMat& o);
  SymMat& operator-=(const SymMat& o);
  SymMat& operator*=(double s);
  friend SymMat operator+(SymMat a, const SymMat& b) { return a += b; }
  friend SymMat operator-(SymMat a, const SymMat& b) { return a -= b; }
  friend SymMat operator*(double s, SymMat a) { return a *= s; }

 private:
  Index packed(Index i, Index j) const {
    if (i < j) std::swap(i, j);
    return j * n_ - j * (j - 1) / 2 + (i - j);
  }

  Index n_ = 0;
  Vec data_;
};

/// Frobenius inner product tr(AB).
double frobenius_inner(const SymMat& a, const SymMat& b);
double frobenius_norm(const SymMat& a);

// ---- svec isometry --------------------------------------------------------
// svec(A) has length n(n+1)/2, lower triangle column-major, off-diagonal
// entries scaled by √2 so that ⟨svec A, svec B⟩ = tr(AB).

inline constexpr Index svec_size(Index n) { return n * (n + 1) / 2; }
/// Inverse of svec_size; throws if `len` is not triangular.
Index svec_dim(Index len);

Vec svec(const SymMat& a);
Vec svec(const Mat& a);
void svec_into(const Mat& a, Eigen::Ref<Vec> out);
SymMat smat(const Eigen::Ref<const Vec>& v);
void smat_into(const Eigen::Ref<const Vec>& v, Mat& out);

// ---- eigen / PSD cone -----------------------------------------------------

struct SymEig {
  Vec values;   ///< descending
  Mat vectors;  ///< orthonormal columns matching `values`
};

/// Full symmetric eigendecomposition; rejects non-finite input.
SymEig sym_eig(const SymMat& s);
SymEig sym_eig(const Mat& s);

/// Frobenius-nearest PSD matrix: eigenvalues clamped at zero.
SymMat project_psd(const SymMat& s);
/// Dense variant used inside kernels; `s` is assumed symmetric.
Mat project_psd(const Mat& s);

double min_eigenvalue(const Mat& s);

// ---- operator norm --------------------------------------------------------

/// y = A x for a linear map from R^dim_in.
using LinearMap = std::function<Vec(const Vec&)>;

/// Power iteration on A*A from a seeded unit Gaussian start vector. Returns
/// sqrt(‖A*A v_k‖) with v_k the normalized k-th iterate, which is a lower
/// bound of ‖A‖ that is nondecreasing in `iters`. A zero operator yields 0.
double power_method_norm(const LinearMap& apply, const LinearMap& apply_adjoint,
                         Index dim_in, int iters, std::uint64_t seed);

}  // namespace arpdps
