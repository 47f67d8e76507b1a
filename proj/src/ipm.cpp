// Dense primal-dual interior-point method for block SDPs.
//
// Standard form after conversion: PSD blocks X_b, slacks s ≥ 0 (one per
// inequality) and free scalars u,
//
//   min ⟨C, X⟩ + cᵀu   s.t.  𝒜(X) + Is + Fu = b,
//
// dual  max bᵀy  s.t.  𝒜*y + Z = C,  y_s + z = 0,  Fᵀy = c.
#include "arpdps/conic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

namespace arpdps {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInfeasTol = 1e-8;

// Symmetric matrix term: ⟨A, X⟩ = Σ v·X(r, c) with r ≥ c. As a matrix,
// A(r, c) = A(c, r) = v/2 off the diagonal.
struct SparseSym {
  int block = 0;
  std::vector<int> r;
  std::vector<int> c;
  std::vector<double> v;
};

struct Row {
  std::vector<SparseSym> parts;
  int slack = -1;
  std::vector<std::pair<int, double>> free;
  double rhs = 0.0;
};

struct Merged {
  std::map<std::pair<int, std::pair<int, int>>, double> blocks;
  std::map<int, double> scalars;
};

Merged merge(const LinearFunctional& f) {
  Merged m;
  for (const auto& e : f.blocks) {
    const int r = std::max(e.row, e.col);
    const int c = std::min(e.row, e.col);
    m.blocks[{e.block, {r, c}}] += e.value;
  }
  for (const auto& e : f.scalars) m.scalars[e.index] += e.value;
  return m;
}

Row make_row(const LinearFunctional& f, double rhs) {
  Row row;
  row.rhs = rhs;
  const Merged m = merge(f);
  for (const auto& [key, v] : m.blocks) {
    if (v == 0.0) continue;
    if (row.parts.empty() || row.parts.back().block != key.first) row.parts.push_back({key.first, {}, {}, {}});
    row.parts.back().r.push_back(key.second.first);
    row.parts.back().c.push_back(key.second.second);
    row.parts.back().v.push_back(v);
  }
  for (const auto& [i, v] : m.scalars)
    if (v != 0.0) row.free.emplace_back(i, v);
  return row;
}

double row_norm2(const Row& row) {
  double s = row.slack >= 0 ? 1.0 : 0.0;
  for (const auto& part : row.parts)
    for (std::size_t k = 0; k < part.v.size(); ++k)
      s += (part.r[k] == part.c[k]) ? part.v[k] * part.v[k] : 0.5 * part.v[k] * part.v[k];
  for (const auto& [i, v] : row.free) s += v * v;
  return s;
}

double inner(const SparseSym& a, const Mat& x) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.v.size(); ++k) s += a.v[k] * x(a.r[k], a.c[k]);
  return s;
}

void add_scaled(const SparseSym& a, double w, Mat& out) {
  for (std::size_t k = 0; k < a.v.size(); ++k) {
    const int r = a.r[k];
    const int c = a.c[k];
    if (r == c) {
      out(r, r) += w * a.v[k];
    } else {
      out(r, c) += 0.5 * w * a.v[k];
      out(c, r) += 0.5 * w * a.v[k];
    }
  }
}

Mat sym(const Mat& a) { return 0.5 * (a + a.transpose()); }

// Largest α with X + α dX ⪰ 0, or +∞.
double max_step(const Mat& x, const Mat& dx) {
  Eigen::LLT<Mat> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  const Mat l_inv_dx = llt.matrixL().solve(dx);
  const Mat t = llt.matrixL().solve(l_inv_dx.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym(t), Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()[0];
  return lmin >= 0.0 ? kInf : -1.0 / lmin;
}

double max_step_lp(const Vec& s, const Vec& ds) {
  double a = kInf;
  for (Index i = 0; i < s.size(); ++i)
    if (ds[i] < 0.0) a = std::min(a, -s[i] / ds[i]);
  return a;
}

class Solver {
 public:
  Solver(const SdpProblem& p, double tol, const InteriorPointOptions& opts) : p_(p), tol_(tol), opts_(opts) {}

  SdpSolution run(bool use_hint);

 private:
  bool build();
  void scale();
  void initial_point(bool use_hint);

  Vec apply_a(const std::vector<Mat>& x, const Vec& s, const Vec& u) const;
  void apply_adjoint(const Vec& y, std::vector<Mat>& blocks, Vec& lp, Vec& fr) const;
  Mat schur(const std::vector<Mat>& w) const;

  struct Direction {
    std::vector<Mat> dx, dz;
    Vec ds, dzl, dy, du;
  };
  bool direction(const Eigen::LLT<Mat>& m_fact, const Mat& mf, const Eigen::LDLT<Mat>* s_fact,
                 const std::vector<Mat>& w, const std::vector<Mat>& rd, const Vec& rdl, const Vec& rp, const Vec& rf,
                 double sigma_mu, const Direction* pred, Direction& out) const;

  SdpSolution finish(SdpStatus status, const std::string& msg, int iters);

  const SdpProblem& p_;
  double tol_;
  InteriorPointOptions opts_;

  int nb_ = 0;
  std::vector<int> n_;
  int nl_ = 0;
  int nf_ = 0;
  std::vector<Row> rows_;
  std::vector<int> row_origin_;  // original constraint index (eq first, then ineq)
  std::vector<std::vector<int>> rows_in_block_;
  std::vector<std::vector<int>> part_of_row_;  // per block, part index within rows_[i]
  std::vector<int> slack_row_;
  std::vector<Mat> c_;
  Vec cf_;
  Vec b_;
  Vec dscale_;
  double sb_ = 1.0;
  double sc_ = 1.0;
  std::vector<char> free_used_;

  std::vector<Mat> x_, z_;
  Vec s_, zl_, y_, u_;
  double pinf_ = kInf, dinf_ = kInf, relgap_ = kInf;
  double pobj_ = 0.0, dobj_ = 0.0;
};

bool Solver::build() {
  nb_ = static_cast<int>(p_.psd_blocks.size());
  n_ = p_.psd_blocks;
  nf_ = p_.free_vars;
  nl_ = static_cast<int>(p_.ineq_constraints.size());

  c_.clear();
  for (int n : n_) c_.push_back(Mat::Zero(n, n));
  cf_ = Vec::Zero(nf_);
  for (const auto& e : p_.objective.blocks) {
    auto& cm = c_[static_cast<std::size_t>(e.block)];
    if (e.row == e.col) {
      cm(e.row, e.row) += e.value;
    } else {
      cm(e.row, e.col) += 0.5 * e.value;
      cm(e.col, e.row) += 0.5 * e.value;
    }
  }
  for (const auto& e : p_.objective.scalars) cf_[e.index] += e.value;

  rows_.clear();
  row_origin_.clear();
  for (std::size_t i = 0; i < p_.eq_constraints.size(); ++i) {
    rows_.push_back(make_row(p_.eq_constraints[i].lhs, p_.eq_constraints[i].rhs));
    row_origin_.push_back(static_cast<int>(i));
  }
  for (std::size_t j = 0; j < p_.ineq_constraints.size(); ++j) {
    Row r = make_row(p_.ineq_constraints[j].lhs, p_.ineq_constraints[j].rhs);
    r.slack = static_cast<int>(j);
    rows_.push_back(std::move(r));
    row_origin_.push_back(static_cast<int>(p_.eq_constraints.size() + j));
  }
  return true;
}

void Solver::scale() {
  const int m = static_cast<int>(rows_.size());
  dscale_ = Vec::Ones(m);
  for (int i = 0; i < m; ++i) {
    auto& row = rows_[static_cast<std::size_t>(i)];
    const double nrm = std::sqrt(row_norm2(row));
    const double d = 1.0 / nrm;
    dscale_[i] = d;
    for (auto& part : row.parts)
      for (double& v : part.v) v *= d;
    for (auto& [k, v] : row.free) v *= d;
    row.rhs *= d;
  }
  // Slack columns keep unit coefficients; rescale the slack variable instead.
  b_ = Vec(m);
  for (int i = 0; i < m; ++i) b_[i] = rows_[static_cast<std::size_t>(i)].rhs;
  sb_ = std::max(1.0, b_.lpNorm<Eigen::Infinity>());
  b_ /= sb_;
  double cn = cf_.squaredNorm();
  for (const auto& cm : c_) cn += cm.squaredNorm();
  sc_ = std::max(1.0, std::sqrt(cn));
  for (auto& cm : c_) cm /= sc_;
  cf_ /= sc_;

  rows_in_block_.assign(static_cast<std::size_t>(nb_), {});
  part_of_row_.assign(static_cast<std::size_t>(nb_), {});
  slack_row_.assign(static_cast<std::size_t>(nl_), -1);
  for (int i = 0; i < m; ++i) {
    const auto& row = rows_[static_cast<std::size_t>(i)];
    for (std::size_t k = 0; k < row.parts.size(); ++k) {
      rows_in_block_[static_cast<std::size_t>(row.parts[k].block)].push_back(i);
      part_of_row_[static_cast<std::size_t>(row.parts[k].block)].push_back(static_cast<int>(k));
    }
    if (row.slack >= 0) slack_row_[static_cast<std::size_t>(row.slack)] = i;
  }
}

Vec Solver::apply_a(const std::vector<Mat>& x, const Vec& s, const Vec& u) const {
  Vec out(static_cast<Index>(rows_.size()));
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto& row = rows_[i];
    double v = 0.0;
    for (const auto& part : row.parts) v += inner(part, x[static_cast<std::size_t>(part.block)]);
    if (row.slack >= 0) v += s[row.slack];
    for (const auto& [k, c] : row.free) v += c * u[k];
    out[static_cast<Index>(i)] = v;
  }
  return out;
}

void Solver::apply_adjoint(const Vec& y, std::vector<Mat>& blocks, Vec& lp, Vec& fr) const {
  blocks.resize(static_cast<std::size_t>(nb_));
  for (int b = 0; b < nb_; ++b) blocks[static_cast<std::size_t>(b)] = Mat::Zero(n_[static_cast<std::size_t>(b)], n_[static_cast<std::size_t>(b)]);
  lp = Vec::Zero(nl_);
  fr = Vec::Zero(nf_);
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto& row = rows_[i];
    const double yi = y[static_cast<Index>(i)];
    for (const auto& part : row.parts) add_scaled(part, yi, blocks[static_cast<std::size_t>(part.block)]);
    if (row.slack >= 0) lp[row.slack] += yi;
    for (const auto& [k, c] : row.free) fr[k] += c * yi;
  }
}

Mat Solver::schur(const std::vector<Mat>& w) const {
  const auto m = static_cast<Index>(rows_.size());
  Mat mm = Mat::Zero(m, m);
  for (int b = 0; b < nb_; ++b) {
    const auto& rows = rows_in_block_[static_cast<std::size_t>(b)];
    const auto& parts = part_of_row_[static_cast<std::size_t>(b)];
    const Mat& x = x_[static_cast<std::size_t>(b)];
    const Mat& wb = w[static_cast<std::size_t>(b)];
    const auto nrows = static_cast<long>(rows.size());
    const Index n = x.rows();
#pragma omp parallel for schedule(dynamic) if (nrows * n * n > 200000)
    for (long jj = 0; jj < nrows; ++jj) {
      const int j = rows[static_cast<std::size_t>(jj)];
      const auto& aj = rows_[static_cast<std::size_t>(j)].parts[static_cast<std::size_t>(parts[static_cast<std::size_t>(jj)])];
      // G = X A_j W
      Mat g = Mat::Zero(n, n);
      for (std::size_t k = 0; k < aj.v.size(); ++k) {
        const int r = aj.r[k];
        const int c = aj.c[k];
        if (r == c) {
          g.noalias() += aj.v[k] * x.col(r) * wb.row(r);
        } else {
          g.noalias() += 0.5 * aj.v[k] * x.col(r) * wb.row(c);
          g.noalias() += 0.5 * aj.v[k] * x.col(c) * wb.row(r);
        }
      }
      for (long ii = 0; ii < nrows; ++ii) {
        const int i = rows[static_cast<std::size_t>(ii)];
        const auto& ai = rows_[static_cast<std::size_t>(i)].parts[static_cast<std::size_t>(parts[static_cast<std::size_t>(ii)])];
        double v = 0.0;
        for (std::size_t k = 0; k < ai.v.size(); ++k) {
          const int r = ai.r[k];
          const int c = ai.c[k];
          v += (r == c) ? ai.v[k] * g(r, r) : 0.5 * ai.v[k] * (g(r, c) + g(c, r));
        }
        mm(i, j) += v;
      }
    }
  }
  return sym(mm);
}

void Solver::initial_point(bool use_hint) {
  const auto m = static_cast<Index>(rows_.size());
  x_.assign(static_cast<std::size_t>(nb_), Mat());
  z_.assign(static_cast<std::size_t>(nb_), Mat());
  for (int b = 0; b < nb_; ++b) {
    const double n = n_[static_cast<std::size_t>(b)];
    double xi = std::max(10.0, std::sqrt(n));
    double eta = std::max({10.0, std::sqrt(n), c_[static_cast<std::size_t>(b)].norm()});
    for (int i : rows_in_block_[static_cast<std::size_t>(b)]) {
      const auto& row = rows_[static_cast<std::size_t>(i)];
      double an = 0.0;
      for (const auto& part : row.parts)
        if (part.block == b)
          for (std::size_t k = 0; k < part.v.size(); ++k) an += part.v[k] * part.v[k];
      an = std::sqrt(an);
      xi = std::max(xi, n * (1.0 + std::abs(b_[i])) / (1.0 + an));
      eta = std::max(eta, an);
    }
    x_[static_cast<std::size_t>(b)] = xi * Mat::Identity(static_cast<Index>(n), static_cast<Index>(n));
    z_[static_cast<std::size_t>(b)] = eta * Mat::Identity(static_cast<Index>(n), static_cast<Index>(n));
  }
  s_ = Vec::Constant(nl_, std::max(10.0, 1.0 + (nl_ > 0 ? b_.lpNorm<Eigen::Infinity>() : 0.0)));
  zl_ = Vec::Constant(nl_, 10.0);
  y_ = Vec::Zero(m);
  u_ = Vec::Zero(nf_);

  if (use_hint && p_.hint) {
    const auto& h = *p_.hint;
    for (int b = 0; b < nb_; ++b) {
      const Mat hx = sym(h.blocks[static_cast<std::size_t>(b)]) / sb_;
      const Index n = hx.rows();
      const double shift = std::max(0.0, -min_eigenvalue(hx)) + 1e-2 * (1.0 + hx.norm());
      x_[static_cast<std::size_t>(b)] = hx + shift * Mat::Identity(n, n);
    }
    if (h.scalars.size() == nf_) u_ = h.scalars / sb_;
  }
}

bool Solver::direction(const Eigen::LLT<Mat>& m_fact, const Mat& mf, const Eigen::LDLT<Mat>* s_fact,
                       const std::vector<Mat>& w, const std::vector<Mat>& rd, const Vec& rdl, const Vec& rp,
                       const Vec& rf, double sigma_mu, const Direction* pred, Direction& out) const {
  std::vector<Mat> t(static_cast<std::size_t>(nb_));
  for (int b = 0; b < nb_; ++b) {
    const auto bi = static_cast<std::size_t>(b);
    Mat h = sigma_mu * w[bi] - x_[bi];
    if (pred) h -= sym(pred->dx[bi] * pred->dz[bi] * w[bi]);
    t[bi] = h - sym(x_[bi] * rd[bi] * w[bi]);
  }
  Vec tl(nl_);
  for (int j = 0; j < nl_; ++j) {
    double comp = sigma_mu - s_[j] * zl_[j];
    if (pred) comp -= pred->ds[j] * pred->dzl[j];
    tl[j] = comp / zl_[j] - (s_[j] / zl_[j]) * rdl[j];
  }
  const Vec h = rp - apply_a(t, tl, Vec::Zero(nf_));

  Vec du = Vec::Zero(nf_);
  Vec dy;
  if (nf_ > 0) {
    const Vec mh = m_fact.solve(h);
    du = s_fact->solve(mf.transpose() * mh - rf);
    dy = m_fact.solve(h - mf * du);
  } else {
    dy = m_fact.solve(h);
  }
  if (!dy.allFinite() || !du.allFinite()) return false;

  std::vector<Mat> aty;
  Vec atyl, atyf;
  out.dx.resize(static_cast<std::size_t>(nb_));
  out.dz.resize(static_cast<std::size_t>(nb_));
  out.ds.resize(nl_);
  auto recover = [&]() {
    apply_adjoint(dy, aty, atyl, atyf);
    for (int b = 0; b < nb_; ++b) {
      const auto bi = static_cast<std::size_t>(b);
      out.dz[bi] = rd[bi] - aty[bi];
      out.dx[bi] = t[bi] + sym(x_[bi] * aty[bi] * w[bi]);
    }
    out.dzl = rdl - atyl;
    for (int j = 0; j < nl_; ++j) out.ds[j] = tl[j] + (s_[j] / zl_[j]) * atyl[j];
  };
  recover();
  // Near the boundary the Schur matrix is badly conditioned; a few refinement
  // sweeps on the primal residual of the direction keep it usable.
  if (nf_ == 0) {
    double res_norm = (apply_a(out.dx, out.ds, du) - rp).norm();
    for (int sweep = 0; sweep < 3 && res_norm > 1e-14 * (1.0 + rp.norm()); ++sweep) {
      const Vec res = rp - apply_a(out.dx, out.ds, du);
      const Vec dy_old = dy;
      dy += m_fact.solve(res);
      if (!dy.allFinite()) return false;
      recover();
      const double nr = (apply_a(out.dx, out.ds, du) - rp).norm();
      if (!(nr < 0.5 * res_norm)) {
        dy = dy_old;
        recover();
        break;
      }
      res_norm = nr;
    }
  }
  out.dy = dy;
  out.du = du;
  return true;
}

SdpSolution Solver::finish(SdpStatus status, const std::string& msg, int iters) {
  SdpSolution sol;
  sol.status = status;
  sol.message = msg;
  sol.iterations = iters;
  const std::size_t neq = p_.eq_constraints.size();
  sol.eq_duals = Vec::Zero(static_cast<Index>(neq));
  sol.ineq_duals = Vec::Zero(nl_);
  sol.scalar_values = Vec::Zero(nf_);
  for (int b = 0; b < nb_; ++b) {
    const auto bi = static_cast<std::size_t>(b);
    sol.block_values.push_back(x_.empty() ? Mat::Zero(n_[bi], n_[bi]) : Mat(sb_ * x_[bi]));
    sol.dual_blocks.push_back(z_.empty() ? Mat::Zero(n_[bi], n_[bi]) : Mat(sc_ * z_[bi]));
  }
  if (u_.size() == nf_) sol.scalar_values = sb_ * u_;
  if (y_.size() == static_cast<Index>(rows_.size())) {
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const double yi = sc_ * dscale_[static_cast<Index>(i)] * y_[static_cast<Index>(i)];
      const int o = row_origin_[i];
      if (static_cast<std::size_t>(o) < neq)
        sol.eq_duals[o] = yi;
      else
        sol.ineq_duals[static_cast<Index>(static_cast<std::size_t>(o) - neq)] = -yi;
    }
  }
  sol.objective_value = evaluate(p_.objective, sol.block_values, sol.scalar_values) + p_.objective_offset;
  double dobj = p_.objective_offset;
  for (Index i = 0; i < sol.eq_duals.size(); ++i) dobj += p_.eq_constraints[static_cast<std::size_t>(i)].rhs * sol.eq_duals[i];
  for (Index j = 0; j < sol.ineq_duals.size(); ++j)
    dobj -= p_.ineq_constraints[static_cast<std::size_t>(j)].rhs * sol.ineq_duals[j];
  sol.dual_objective_value = dobj;
  sol.gap = std::abs(sol.objective_value - sol.dual_objective_value);
  sol.primal_residual = pinf_;
  sol.dual_residual = dinf_;
  return sol;
}

SdpSolution Solver::run(bool use_hint) {
  build();

  // Free variables without any constraint either vanish or make the problem unbounded.
  free_used_.assign(static_cast<std::size_t>(nf_), 0);
  for (const auto& row : rows_)
    for (const auto& [k, c] : row.free) free_used_[static_cast<std::size_t>(k)] = 1;
  for (int k = 0; k < nf_; ++k)
    if (!free_used_[static_cast<std::size_t>(k)] && cf_[k] != 0.0) {
      pinf_ = dinf_ = kInf;
      return finish(SdpStatus::unbounded, "free variable with nonzero cost and no constraint", 0);
    }

  // Empty rows: 0 = b or 0 + s = e.
  std::vector<Row> kept;
  std::vector<int> kept_origin;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto& row = rows_[i];
    if (row.parts.empty() && row.free.empty()) {
      const bool bad = row.slack < 0 ? std::abs(row.rhs) > 1e-12 : row.rhs < -1e-12;
      if (bad) {
        pinf_ = dinf_ = kInf;
        return finish(SdpStatus::infeasible, "constraint with empty left-hand side cannot hold", 0);
      }
      if (row.slack < 0) continue;
    }
    kept.push_back(row);
    kept_origin.push_back(row_origin_[i]);
  }
  rows_ = std::move(kept);
  row_origin_ = std::move(kept_origin);
  scale();

  // Linearly dependent rows: drop consistent ones, report inconsistent ones.
  {
    const auto m = static_cast<Index>(rows_.size());
    Mat gram = Mat::Zero(m, m);
    {
      std::vector<Mat> ones;
      for (int b = 0; b < nb_; ++b) ones.push_back(Mat::Identity(n_[static_cast<std::size_t>(b)], n_[static_cast<std::size_t>(b)]));
      x_ = ones;
      gram = schur(ones);
      for (int j = 0; j < nl_; ++j) {
        const int i = slack_row_[static_cast<std::size_t>(j)];
        if (i >= 0) gram(i, i) += 1.0;
      }
      for (Index i = 0; i < m; ++i)
        for (Index k = 0; k < m; ++k) {
          double v = 0.0;
          for (const auto& [a, ca] : rows_[static_cast<std::size_t>(i)].free)
            for (const auto& [bk, cb] : rows_[static_cast<std::size_t>(k)].free)
              if (a == bk) v += ca * cb;
          gram(i, k) += v;
        }
    }
    Eigen::LDLT<Mat> ldlt(gram);
    const double dmax = m > 0 ? ldlt.vectorD().cwiseAbs().maxCoeff() : 0.0;
    const bool independent = m == 0 || (ldlt.info() == Eigen::Success && ldlt.vectorD().minCoeff() > 1e-10 * dmax);
    if (!independent) {
      Eigen::ColPivHouseholderQR<Mat> qr(gram);
      qr.setThreshold(1e-9);
      const Index rank = qr.rank();
      std::vector<int> keep_idx;
      for (Index k = 0; k < rank; ++k) keep_idx.push_back(static_cast<int>(qr.colsPermutation().indices()[k]));
      std::sort(keep_idx.begin(), keep_idx.end());
      // Consistency: b must lie in the range of the Gram matrix restricted to kept rows.
      Mat gk(m, static_cast<Index>(keep_idx.size()));
      Vec bk(static_cast<Index>(keep_idx.size()));
      for (std::size_t k = 0; k < keep_idx.size(); ++k) {
        gk.col(static_cast<Index>(k)) = gram.col(keep_idx[k]);
        bk[static_cast<Index>(k)] = b_[keep_idx[k]];
      }
      // Each dropped row i satisfies a_i = Σ_k λ_k a_k; then b_i must equal Σ λ_k b_k.
      Mat gkk(static_cast<Index>(keep_idx.size()), static_cast<Index>(keep_idx.size()));
      for (std::size_t a = 0; a < keep_idx.size(); ++a) gkk.row(static_cast<Index>(a)) = gk.row(keep_idx[a]);
      Eigen::LDLT<Mat> kk(gkk);
      std::vector<char> is_kept(static_cast<std::size_t>(m), 0);
      for (int k : keep_idx) is_kept[static_cast<std::size_t>(k)] = 1;
      for (Index i = 0; i < m; ++i) {
        if (is_kept[static_cast<std::size_t>(i)]) continue;
        const Vec lam = kk.solve(gk.row(i).transpose());
        const double pred = lam.dot(bk);
        if (std::abs(pred - b_[i]) > 1e-8 * (1.0 + std::abs(b_[i]))) {
          pinf_ = dinf_ = kInf;
          y_.resize(0);
          return finish(SdpStatus::infeasible, "inconsistent linearly dependent equality constraints", 0);
        }
      }
      std::vector<Row> r2;
      std::vector<int> o2;
      Vec b2(static_cast<Index>(keep_idx.size()));
      Vec d2(static_cast<Index>(keep_idx.size()));
      for (std::size_t k = 0; k < keep_idx.size(); ++k) {
        r2.push_back(rows_[static_cast<std::size_t>(keep_idx[k])]);
        o2.push_back(row_origin_[static_cast<std::size_t>(keep_idx[k])]);
        b2[static_cast<Index>(k)] = b_[keep_idx[k]];
        d2[static_cast<Index>(k)] = dscale_[keep_idx[k]];
      }
      rows_ = std::move(r2);
      row_origin_ = std::move(o2);
      // Rows are already scaled; rebuild the block incidence lists only.
      rows_in_block_.assign(static_cast<std::size_t>(nb_), {});
      part_of_row_.assign(static_cast<std::size_t>(nb_), {});
      slack_row_.assign(static_cast<std::size_t>(nl_), -1);
      for (std::size_t i = 0; i < rows_.size(); ++i) {
        const auto& row = rows_[i];
        for (std::size_t k = 0; k < row.parts.size(); ++k) {
          rows_in_block_[static_cast<std::size_t>(row.parts[k].block)].push_back(static_cast<int>(i));
          part_of_row_[static_cast<std::size_t>(row.parts[k].block)].push_back(static_cast<int>(k));
        }
        if (row.slack >= 0) slack_row_[static_cast<std::size_t>(row.slack)] = static_cast<int>(i);
      }
      b_ = b2;
      dscale_ = d2;
    }
  }

  initial_point(use_hint);
  const auto m = static_cast<Index>(rows_.size());
  double n_total = nl_;
  for (int n : n_) n_total += n;
  double normb = b_.norm();
  double normc = cf_.squaredNorm();
  for (const auto& cm : c_) normc += cm.squaredNorm();
  normc = std::sqrt(normc);

  int stall = 0;
  int iters = 0;
  double best_score = kInf;
  double best_mu = kInf;
  struct Snapshot {
    std::vector<Mat> x, z;
    Vec s, zl, y, u;
    double pinf = kInf, dinf = kInf, relgap = kInf;
    double score() const { return std::max({pinf, dinf, relgap}); }
  } best;
  double last_obj_mag = 1.0;
  for (int it = 0; it <= opts_.max_iters; ++it) {
    iters = it;
    std::vector<Mat> aty;
    Vec atyl, atyf;
    apply_adjoint(y_, aty, atyl, atyf);
    std::vector<Mat> rd(static_cast<std::size_t>(nb_));
    double rd2 = 0.0;
    double cx = cf_.dot(u_);
    double xz = s_.dot(zl_);
    for (int b = 0; b < nb_; ++b) {
      const auto bi = static_cast<std::size_t>(b);
      rd[bi] = c_[bi] - aty[bi] - z_[bi];
      rd2 += rd[bi].squaredNorm();
      cx += (c_[bi].array() * x_[bi].array()).sum();
      xz += (x_[bi].array() * z_[bi].array()).sum();
    }
    const Vec rdl = -atyl - zl_;
    const Vec rf = cf_ - atyf;
    rd2 += rdl.squaredNorm() + rf.squaredNorm();
    const Vec rp = b_ - apply_a(x_, s_, u_);
    pobj_ = cx;
    dobj_ = b_.dot(y_);
    pinf_ = rp.norm() / (1.0 + normb);
    dinf_ = std::sqrt(rd2) / (1.0 + normc);
    relgap_ = std::abs(pobj_ - dobj_) / (1.0 + std::abs(pobj_) + std::abs(dobj_));
    const double mu = n_total > 0 ? xz / n_total : 0.0;

    if (opts_.verbose)
      std::fprintf(stderr, "%3d pobj %+.8e dobj %+.8e pinf %.2e dinf %.2e gap %.2e mu %.2e\n", it, pobj_, dobj_, pinf_,
                   dinf_, relgap_, mu);
    if (pinf_ <= tol_ && dinf_ <= tol_ && relgap_ <= tol_) return finish(SdpStatus::optimal, "converged", it);
    if (std::max({pinf_, dinf_, relgap_}) < best.score()) best = {x_, z_, s_, zl_, y_, u_, pinf_, dinf_, relgap_};

    // Infeasibility certificates (rays).
    if (dobj_ > 0.0) {
      double ray = 0.0;
      for (int b = 0; b < nb_; ++b) ray += (aty[static_cast<std::size_t>(b)] + z_[static_cast<std::size_t>(b)]).squaredNorm();
      ray += (atyl + zl_).squaredNorm() + atyf.squaredNorm();
      if (std::sqrt(ray) / dobj_ <= kInfeasTol) return finish(SdpStatus::infeasible, "dual ray certifies primal infeasibility", it);
    }
    if (pobj_ < 0.0) {
      const double ax = (apply_a(x_, s_, u_)).norm();
      if (ax / -pobj_ <= kInfeasTol)
        return finish(SdpStatus::unbounded, "primal ray certifies unboundedness", it);
    }
    if (it == opts_.max_iters) break;

    // Diverging objectives are how rays show up, so they never count as stalls.
    const double score = std::max({pinf_, dinf_, relgap_});
    const double obj_mag = std::max(std::abs(pobj_), std::abs(dobj_));
    if (score < best_score * 0.999 || obj_mag > 1.5 * last_obj_mag || mu < 0.5 * best_mu) {
      best_score = std::min(best_score, score);
      best_mu = std::min(best_mu, mu);
      stall = 0;
    } else if (++stall > 8) {
      break;
    }
    last_obj_mag = std::max(last_obj_mag, obj_mag);

    std::vector<Mat> w(static_cast<std::size_t>(nb_));
    bool ok = true;
    for (int b = 0; b < nb_; ++b) {
      const auto bi = static_cast<std::size_t>(b);
      Eigen::LLT<Mat> lz(z_[bi]);
      if (lz.info() != Eigen::Success) {
        ok = false;
        break;
      }
      w[bi] = sym(lz.solve(Mat::Identity(z_[bi].rows(), z_[bi].cols())));
    }
    if (!ok) break;

    Mat mm = schur(w);
    for (int j = 0; j < nl_; ++j) {
      const int i = slack_row_[static_cast<std::size_t>(j)];
      mm(i, i) += s_[j] / zl_[j];
    }
    Eigen::LLT<Mat> m_fact(mm);
    if (m_fact.info() != Eigen::Success) {
      const double reg = 1e-13 * std::max(1.0, mm.diagonal().cwiseAbs().maxCoeff());
      mm.diagonal().array() += reg;
      m_fact.compute(mm);
      if (m_fact.info() != Eigen::Success) break;
    }
    Mat mf = Mat::Zero(m, nf_);
    for (Index i = 0; i < m; ++i)
      for (const auto& [k, c] : rows_[static_cast<std::size_t>(i)].free) mf(i, k) += c;
    Eigen::LDLT<Mat> s_fact;
    if (nf_ > 0) {
      Mat sm = mf.transpose() * m_fact.solve(mf);
      for (int k = 0; k < nf_; ++k)
        if (!free_used_[static_cast<std::size_t>(k)]) sm(k, k) += 1.0;
      s_fact.compute(sym(sm));
    }

    Direction pred;
    if (!direction(m_fact, mf, nf_ > 0 ? &s_fact : nullptr, w, rd, rdl, rp, rf, 0.0, nullptr, pred)) break;
    double ap = 1.0, ad = 1.0;
    for (int b = 0; b < nb_; ++b) {
      const auto bi = static_cast<std::size_t>(b);
      ap = std::min(ap, max_step(x_[bi], pred.dx[bi]));
      ad = std::min(ad, max_step(z_[bi], pred.dz[bi]));
    }
    ap = std::min(ap, max_step_lp(s_, pred.ds));
    ad = std::min(ad, max_step_lp(zl_, pred.dzl));
    double xz_aff = 0.0;
    for (int b = 0; b < nb_; ++b) {
      const auto bi = static_cast<std::size_t>(b);
      xz_aff += ((x_[bi] + ap * pred.dx[bi]).array() * (z_[bi] + ad * pred.dz[bi]).array()).sum();
    }
    xz_aff += (s_ + ap * pred.ds).dot(zl_ + ad * pred.dzl);
    const double mu_aff = n_total > 0 ? xz_aff / n_total : 0.0;
    double sigma = mu > 0.0 ? std::pow(std::max(0.0, mu_aff) / mu, 3) : 0.0;
    sigma = std::clamp(sigma, 0.0, 1.0);
    // Keep some centering while primal or dual infeasibility dominates.
    if (std::max(pinf_, dinf_) > 10.0 * relgap_) sigma = std::max(sigma, 0.1 * std::min(1.0, std::max(pinf_, dinf_)));

    Direction corr;
    if (!direction(m_fact, mf, nf_ > 0 ? &s_fact : nullptr, w, rd, rdl, rp, rf, sigma * mu, &pred, corr)) break;
    const double gamma = std::max(opts_.step_fraction_min, std::min(0.99, 0.9 + 0.09 * std::min(ap, ad)));
    double sp = kInf, sd = kInf;
    for (int b = 0; b < nb_; ++b) {
      const auto bi = static_cast<std::size_t>(b);
      sp = std::min(sp, max_step(x_[bi], corr.dx[bi]));
      sd = std::min(sd, max_step(z_[bi], corr.dz[bi]));
    }
    sp = std::min(sp, max_step_lp(s_, corr.ds));
    sd = std::min(sd, max_step_lp(zl_, corr.dzl));
    const double alpha_p = std::min(1.0, gamma * sp);
    const double alpha_d = std::min(1.0, gamma * sd);
    if (alpha_p < 1e-10 && alpha_d < 1e-10) break;

    for (int b = 0; b < nb_; ++b) {
      const auto bi = static_cast<std::size_t>(b);
      x_[bi] = sym(x_[bi] + alpha_p * corr.dx[bi]);
      z_[bi] = sym(z_[bi] + alpha_d * corr.dz[bi]);
    }
    s_ += alpha_p * corr.ds;
    u_ += alpha_p * corr.du;
    zl_ += alpha_d * corr.dzl;
    y_ += alpha_d * corr.dy;
  }

  // Late iterations can lose accuracy; report the best point seen.
  if (best.score() < std::max({pinf_, dinf_, relgap_})) {
    x_ = best.x;
    z_ = best.z;
    s_ = best.s;
    zl_ = best.zl;
    y_ = best.y;
    u_ = best.u;
    pinf_ = best.pinf;
    dinf_ = best.dinf;
    relgap_ = best.relgap;
  }
  const double loose = std::sqrt(tol_);
  if (pinf_ <= loose && dinf_ <= loose && relgap_ <= loose)
    return finish(SdpStatus::inaccurate, "stopped before reaching the requested tolerance", iters);
  return finish(SdpStatus::error, "interior-point method failed to converge", iters);
}

}  // namespace

SdpSolution InteriorPointBackend::solve(const SdpProblem& p, double tol) const {
  p.validate();
  if (opts_.use_hint && p.hint) {
    Solver warm(p, tol, opts_);
    SdpSolution sol = warm.run(true);
    if (sol.status == SdpStatus::optimal) return sol;
  }
  Solver cold(p, tol, opts_);
  return cold.run(false);
}

}  // namespace arpdps
