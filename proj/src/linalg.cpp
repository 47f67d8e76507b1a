#include "arpdps/linalg.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace arpdps {

SymMat SymMat::from_dense(const Mat& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("SymMat::from_dense: matrix is not square");
  SymMat s(m.rows());
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = j; i < m.rows(); ++i) s(i, j) = 0.5 * (m(i, j) + m(j, i));
  return s;
}

SymMat SymMat::identity(Index n) {
  SymMat s(n);
  for (Index i = 0; i < n; ++i) s(i, i) = 1.0;
  return s;
}

SymMat SymMat::diagonal(const Vec& d) {
  SymMat s(d.size());
  for (Index i = 0; i < d.size(); ++i) s(i, i) = d[i];
  return s;
}

Mat SymMat::dense() const {
  Mat m(n_, n_);
  for (Index j = 0; j < n_; ++j)
    for (Index i = j; i < n_; ++i) m(i, j) = m(j, i) = (*this)(i, j);
  return m;
}

SymMat& SymMat::operator+=(const SymMat& o) {
  if (o.n_ != n_) throw std::invalid_argument("SymMat: dimension mismatch");
  data_ += o.data_;
  return *this;
}

SymMat& SymMat::operator-=(const SymMat& o) {
  if (o.n_ != n_) throw std::invalid_argument("SymMat: dimension mismatch");
  data_ -= o.data_;
  return *this;
}

SymMat& SymMat::operator*=(double s) {
  data_ *= s;
  return *this;
}

double frobenius_inner(const SymMat& a, const SymMat& b) { return svec(a).dot(svec(b)); }

double frobenius_norm(const SymMat& a) { return svec(a).norm(); }

Index svec_dim(Index len) {
  const auto n = static_cast<Index>(std::llround((std::sqrt(8.0 * static_cast<double>(len) + 1.0) - 1.0) / 2.0));
  if (svec_size(n) != len) throw std::invalid_argument("svec length is not triangular");
  return n;
}

Vec svec(const SymMat& a) {
  Vec v(svec_size(a.n()));
  Index k = 0;
  for (Index j = 0; j < a.n(); ++j)
    for (Index i = j; i < a.n(); ++i) v[k++] = (i == j) ? a(i, j) : std::numbers::sqrt2 * a(i, j);
  return v;
}

Vec svec(const Mat& a) {
  Vec v(svec_size(a.rows()));
  svec_into(a, v);
  return v;
}

void svec_into(const Mat& a, Eigen::Ref<Vec> out) {
  const Index n = a.rows();
  Index k = 0;
  for (Index j = 0; j < n; ++j) {
    out[k++] = a(j, j);
    for (Index i = j + 1; i < n; ++i) out[k++] = std::numbers::sqrt2 * 0.5 * (a(i, j) + a(j, i));
  }
}

SymMat smat(const Eigen::Ref<const Vec>& v) {
  const Index n = svec_dim(v.size());
  SymMat s(n);
  Index k = 0;
  for (Index j = 0; j < n; ++j)
    for (Index i = j; i < n; ++i) s(i, j) = (i == j) ? v[k++] : v[k++] / std::numbers::sqrt2;
  return s;
}

void smat_into(const Eigen::Ref<const Vec>& v, Mat& out) {
  const Index n = svec_dim(v.size());
  out.resize(n, n);
  Index k = 0;
  for (Index j = 0; j < n; ++j) {
    out(j, j) = v[k++];
    for (Index i = j + 1; i < n; ++i) out(i, j) = out(j, i) = v[k++] / std::numbers::sqrt2;
  }
}

SymEig sym_eig(const Mat& s) {
  if (!s.allFinite()) throw std::invalid_argument("sym_eig: non-finite input");
  Eigen::SelfAdjointEigenSolver<Mat> es(s);
  if (es.info() != Eigen::Success) throw std::runtime_error("sym_eig: eigensolver failed");
  SymEig out;
  out.values = es.eigenvalues().reverse();
  out.vectors = es.eigenvectors().rowwise().reverse();
  return out;
}

SymEig sym_eig(const SymMat& s) { return sym_eig(s.dense()); }

Mat project_psd(const Mat& s) {
  Eigen::SelfAdjointEigenSolver<Mat> es(s);
  const Vec clamped = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * clamped.asDiagonal() * es.eigenvectors().transpose();
}

SymMat project_psd(const SymMat& s) {
  if (!s.dense().allFinite()) throw std::invalid_argument("project_psd: non-finite input");
  return SymMat::from_dense(project_psd(s.dense()));
}

double min_eigenvalue(const Mat& s) {
  if (s.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

double power_method_norm(const LinearMap& apply, const LinearMap& apply_adjoint, Index dim_in, int iters,
                         std::uint64_t seed) {
  if (iters < 1) throw std::invalid_argument("power_method_norm: iters must be >= 1");
  if (dim_in == 0) return 0.0;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec v(dim_in);
  for (Index i = 0; i < dim_in; ++i) v[i] = gauss(rng);
  v.normalize();

  double estimate = 0.0;
  for (int it = 0; it < iters; ++it) {
    Vec w = apply_adjoint(apply(v));
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    estimate = std::sqrt(nw);
    v = w / nw;
  }
  return estimate;
}

}  // namespace arpdps
