#include "arpdps/lotsizing.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

namespace arpdps {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Mat two_off_diagonal(int n) { return 2.0 * (Mat::Ones(n, n) - Mat::Identity(n, n)); }

LotSizingInstance blank(int n, double r) {
  if (n < 1) throw std::invalid_argument("lot-sizing: N must be at least 1");
  LotSizingInstance s;
  s.n = n;
  s.nu = Vec::Zero(n);
  s.phi = Vec::Zero(n);
  s.xi = Vec::Zero(n);
  s.t = Mat::Zero(n, n);
  s.demand = Vec::Ones(n);
  s.r = r;
  return s;
}

inline Index yidx(int n, int i, int j) { return static_cast<Index>(j) * n + i; }

// Identity-coupled block whose conjugate prox is y − σP(y/σ).
DualBlock identity_block(std::string name, Index dim, std::function<bool(const Vec&, Vec&, std::string&, long&)> proj) {
  DualBlock b;
  b.name = std::move(name);
  b.dim = dim;
  b.apply = [](const Vec& x, Eigen::Ref<Vec> out) { out = x; };
  b.adjoint_add = [](const Eigen::Ref<const Vec>& y, Vec& acc) { acc += y; };
  b.prox_conj = [proj](Eigen::Ref<Vec> y, double sigma, std::string& err, long& inner) {
    Vec p;
    if (!proj(Vec(y / sigma), p, err, inner)) return false;
    y -= sigma * p;
    return true;
  };
  return b;
}

std::function<bool(const Vec&, Vec&, std::string&, long&)> via_projector(std::shared_ptr<SetProjector> pr) {
  return [pr](const Vec& v, Vec& out, std::string& err, long& inner) {
    const ProjectionResult res = pr->project(v);
    inner += res.inner_iterations;
    if (res.status != SdpStatus::optimal && res.status != SdpStatus::inaccurate) {
      std::ostringstream os;
      os.precision(17);
      os << "projection failed at (" << v.transpose() << "): " << to_string(res.status) << " " << res.message;
      err = os.str();
      return false;
    }
    out = res.point;
    return true;
  };
}

}  // namespace

void LotSizingInstance::validate() const {
  if (n < 1) throw std::invalid_argument("lot-sizing: N must be at least 1");
  auto check = [&](const Vec& v, const char* what) {
    if (v.size() != n) throw std::invalid_argument(std::string("lot-sizing: ") + what + " must have N entries");
    if (!v.allFinite() || (v.array() < 0.0).any())
      throw std::invalid_argument(std::string("lot-sizing: ") + what + " must be finite and nonnegative");
  };
  check(nu, "nu");
  check(phi, "phi");
  check(xi, "xi");
  if (demand.size() != n || !demand.allFinite()) throw std::invalid_argument("lot-sizing: demand must have N finite entries");
  if (t.rows() != n || t.cols() != n || !t.allFinite() || (t.array() < 0.0).any())
    throw std::invalid_argument("lot-sizing: transport costs must be a finite nonnegative N×N matrix");
  for (int i = 0; i < n; ++i)
    if (t(i, i) != 0.0) throw std::invalid_argument("lot-sizing: t_ii must be zero");
  if (!(capacity > 0.0) || !std::isfinite(capacity)) throw std::invalid_argument("lot-sizing: capacity must be positive");
  if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("lot-sizing: r must be nonnegative");
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("lot-sizing: rho must lie in [0, 1]");
}

double LotSizingInstance::production_cost(const Vec& x) const {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += nu[i] * std::pow(x[i], 4) + phi[i] * x[i] * x[i] + xi[i] * x[i];
  return s;
}

bool LotSizingInstance::quartic() const { return (nu.array() != 0.0).any(); }

LotSizingInstance fixed_linear_instance(int n, double r) {
  LotSizingInstance s = blank(n, r);
  s.xi.setOnes();
  s.t = two_off_diagonal(n);
  return s;
}

LotSizingInstance fixed_quartic_instance(int n, double r) {
  LotSizingInstance s = blank(n, r);
  s.nu.setOnes();
  s.t = two_off_diagonal(n);
  return s;
}

LotSizingInstance randomized_instance(int n, std::uint64_t seed, double r) {
  LotSizingInstance s = blank(n, r);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uxi(0.5, 1.5);
  std::uniform_real_distribution<double> ut(1.0, 3.0);
  for (int i = 0; i < n; ++i) s.xi[i] = uxi(rng);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (i != j) s.t(i, j) = ut(rng);
  return s;
}

Polynomial production_epigraph(const LotSizingInstance& inst) {
  const int n = inst.n;
  const int dim = n + 2;
  Polynomial g(dim);
  for (int i = 0; i < n; ++i) {
    MultiIndex a = MultiIndex::unit(dim, i);
    if (inst.xi[i] != 0.0) g.add_term(a, inst.xi[i]);
    if (inst.phi[i] != 0.0) g.add_term(a + a, inst.phi[i]);
    if (inst.nu[i] != 0.0) g.add_term(a + a + a + a, inst.nu[i]);
  }
  g.add_term(MultiIndex::unit(dim, n), -1.0);
  return g;
}

ArpProblem build_lotsizing(const LotSizingInstance& inst) {
  inst.validate();
  const int n = inst.n;
  ArpProblem p;
  p.d = n + 2;
  p.q = n * n;
  p.m = n * n + n + 1;
  p.k = n;
  p.rho = inst.rho;
  const auto um = static_cast<std::size_t>(p.m);
  p.a0.assign(um, Vec::Zero(p.d));
  p.a.assign(um, Mat::Zero(p.d, p.k));
  p.b0 = Vec::Zero(p.m);
  p.bvec.assign(um, Vec::Zero(p.k));
  p.c.assign(um, Vec::Zero(p.q));
  // Flow balance x_i + Σ_j y_ji − Σ_j y_ij ≥ w_i.
  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    p.a0[ui][i] = -1.0;
    p.bvec[ui][i] = -1.0;
    for (int j = 0; j < n; ++j) {
      p.c[ui][yidx(n, i, j)] += 1.0;
      p.c[ui][yidx(n, j, i)] -= 1.0;
    }
  }
  // Transport epigraph Σ t_ij y_ij ≤ ζ.
  const auto ut = static_cast<std::size_t>(n);
  p.a0[ut][n + 1] = -1.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) p.c[ut][yidx(n, i, j)] = inst.t(i, j);
  // y ≥ 0.
  for (int pidx = 0; pidx < p.q; ++pidx) p.c[ut + 1 + static_cast<std::size_t>(pidx)][pidx] = -1.0;

  p.ball.center = inst.demand;
  p.ball.r = inst.r;
  p.box_lo = Vec::Constant(p.d, -kInf);
  p.box_hi = Vec::Constant(p.d, kInf);
  p.box_lo.head(n).setZero();
  p.box_hi.head(n).setConstant(inst.capacity);

  Vec slater = Vec::Zero(p.d);
  slater.head(n).setConstant(0.5 * std::min(1.0, inst.capacity));
  slater[n] = inst.production_cost(slater) + 1.0;
  p.sos_set = SosConvexSet::make(p.d, {production_epigraph(inst)}, slater);

  p.f.linear = Vec::Zero(p.d);
  p.f.linear[n] = 1.0;
  p.f.linear[n + 1] = 1.0;
  return p;
}

PdpsConfig nominal_config() {
  PdpsConfig c;
  c.eps = 1e-8;
  c.max_iters = 200000;
  return c;
}

NominalResult solve_nominal(const LotSizingInstance& inst, const PdpsConfig& cfg,
                            std::shared_ptr<const SdpBackend> backend) {
  inst.validate();
  const int n = inst.n;
  if (n * inst.capacity < inst.demand.sum())
    throw std::runtime_error("nominal lot-sizing model is infeasible: total capacity is below total demand");
  if (!backend) backend = default_backend();
  const int dim = n + 2 + n * n;
  const int yoff = n + 2;

  SplittingProblem sp;
  sp.primal_dim = dim;
  sp.prox_f = [n](Vec& z, double tau) {
    z[n] -= tau;
    z[n + 1] -= tau;
  };
  sp.objective = [n](const Vec& z) { return z[n] + z[n + 1]; };

  Vec lo = Vec::Constant(dim, -kInf);
  Vec hi = Vec::Constant(dim, kInf);
  lo.head(n).setZero();
  hi.head(n).setConstant(inst.capacity);
  lo.tail(n * n).setZero();
  sp.blocks.push_back(identity_block("box", dim, [lo, hi](const Vec& v, Vec& out, std::string&, long&) {
    out = v.cwiseMax(lo).cwiseMin(hi);
    return true;
  }));

  std::vector<int> embed(static_cast<std::size_t>(n + 2));
  for (int i = 0; i < n + 2; ++i) embed[static_cast<std::size_t>(i)] = i;
  const Polynomial g1 = production_epigraph(inst).embed(dim, embed);
  Vec sl_h = Vec::Zero(dim);
  sl_h.head(n).setConstant(0.5 * std::min(1.0, inst.capacity));
  sl_h[n] = inst.production_cost(sl_h) + 1.0;
  auto ph = std::make_shared<SetProjector>(SosConvexSet::make(dim, {g1}, sl_h), backend, cfg.inner_tol,
                                           cfg.warm_start_inner);
  sp.blocks.push_back(identity_block("production", dim, via_projector(ph)));

  // Rows Az ≤ h: −x_i − Σ_j y_ji + Σ_j y_ij ≤ −d_i and Σ t_ij y_ij − ζ ≤ 0.
  Mat a = Mat::Zero(n + 1, dim);
  Vec h = Vec::Zero(n + 1);
  for (int i = 0; i < n; ++i) {
    a(i, i) = -1.0;
    h[i] = -inst.demand[i];
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      a(i, yoff + yidx(n, i, j)) += 1.0;
      a(i, yoff + yidx(n, j, i)) -= 1.0;
    }
  }
  a(n, n + 1) = -1.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) a(n, yoff + yidx(n, i, j)) += inst.t(i, j);
  for (int r = 0; r <= n; ++r) {
    const double s = a.row(r).norm();
    a.row(r) /= s;
    h[r] /= s;
  }
  DualBlock rows;
  rows.name = "polyhedron";
  rows.dim = n + 1;
  rows.apply = [a](const Vec& z, Eigen::Ref<Vec> out) { out = a * z; };
  rows.adjoint_add = [a](const Eigen::Ref<const Vec>& y, Vec& acc) { acc += a.transpose() * y; };
  rows.prox_conj = [h](Eigen::Ref<Vec> y, double sigma, std::string&, long&) {
    y = (y - sigma * h).cwiseMax(0.0);
    return true;
  };
  rows.moreau_residual = [h](const Vec& in, const Vec& out, double sigma) {
    return (out + sigma * (in / sigma).cwiseMin(h) - in).norm();
  };
  sp.blocks.push_back(std::move(rows));
  // Stacked operator (I, I, A): ‖·‖² = 2 + σ_max(A)².
  const double amax = Eigen::JacobiSVD<Mat>(a).singularValues()[0];
  sp.norm = std::sqrt(2.0 + amax * amax);

  NominalResult out;
  out.report = run_pdps(sp, cfg);
  out.x = out.report.x;
  out.objective = out.report.objective;
  return out;
}

double price_of_robustness(double chi_r, double chi_n) {
  if (!(chi_n > 0.0)) throw std::invalid_argument("price_of_robustness: nominal objective must be positive");
  return 100.0 * (chi_r - chi_n) / chi_n;
}

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::I: return "I";
    case Experiment::II: return "II";
    case Experiment::III: return "III";
  }
  return "?";
}

std::string to_string(CostMode c) {
  switch (c) {
    case CostMode::linear: return "linear";
    case CostMode::quartic: return "quartic";
    case CostMode::randomized: return "randomized";
  }
  return "?";
}

Experiment experiment_from_string(const std::string& s) {
  if (s == "I") return Experiment::I;
  if (s == "II") return Experiment::II;
  if (s == "III") return Experiment::III;
  throw std::invalid_argument("unknown experiment '" + s + "' (expected I, II or III)");
}

CostMode cost_mode_from_string(const std::string& s) {
  if (s == "linear") return CostMode::linear;
  if (s == "quartic") return CostMode::quartic;
  if (s == "randomized") return CostMode::randomized;
  throw std::invalid_argument("unknown cost mode '" + s + "' (expected linear, quartic or randomized)");
}

void ExperimentConfig::validate() const {
  if (runs < 1) throw std::invalid_argument("experiment: runs must be at least 1");
  if (n_values.empty()) throw std::invalid_argument("experiment: N list is empty");
  for (int n : n_values)
    if (n < 1) throw std::invalid_argument("experiment: N must be at least 1");
  if (r_grid.empty()) throw std::invalid_argument("experiment: r grid is empty");
  for (double r : r_grid)
    if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("experiment: r values must be finite and >= 0");
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("experiment: rho must lie in [0, 1]");
  if (!(eps > 0.0)) throw std::invalid_argument("experiment: eps must be positive");
  if (max_iters < 1) throw std::invalid_argument("experiment: max_iters must be at least 1");
}

CostMode ExperimentConfig::effective_cost_mode() const {
  if (cost_mode) return *cost_mode;
  switch (experiment) {
    case Experiment::I: return CostMode::randomized;
    case Experiment::II: return CostMode::linear;
    case Experiment::III: return CostMode::quartic;
  }
  return CostMode::linear;
}

std::uint64_t run_seed(std::uint64_t base, int run) {
  // splitmix64
  std::uint64_t z = base + static_cast<std::uint64_t>(run) + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

LotSizingInstance make_instance(CostMode mode, int n, double r, double rho, std::uint64_t seed) {
  LotSizingInstance s;
  switch (mode) {
    case CostMode::linear: s = fixed_linear_instance(n, r); break;
    case CostMode::quartic: s = fixed_quartic_instance(n, r); break;
    case CostMode::randomized: s = randomized_instance(n, seed, r); break;
  }
  s.rho = rho;
  return s;
}

RunRecord solve_instance(const LotSizingInstance& inst, const PdpsConfig& cfg, std::uint64_t seed,
                         std::optional<double> nominal) {
  RunRecord rec;
  rec.n = inst.n;
  rec.r = inst.r;
  rec.seed = seed;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  rec.objective = rec.nominal = rec.por_percent = nan;
  try {
    auto backend = std::make_shared<InteriorPointBackend>();
    PdpsConfig ncfg = nominal_config();
    ncfg.inner_tol = cfg.inner_tol;
    ncfg.seed = cfg.seed;
    if (!nominal || inst.r < 1e-6) {
      const NominalResult nr = solve_nominal(inst, ncfg, backend);
      if (nr.report.status == PdpsStatus::inner_failure) {
        rec.status = "nominal_" + to_string(nr.report.status);
        return rec;
      }
      nominal = nr.objective;
      if (inst.r < 1e-6) {
        rec.objective = rec.nominal = nr.objective;
        rec.por_percent = 0.0;
        rec.iterations = nr.report.iterations;
        rec.wall_time_s = nr.report.wall_time_s;
        rec.status = to_string(nr.report.status);
        return rec;
      }
    }
    rec.nominal = *nominal;
    const CompositeProblem cp(build_lotsizing(inst));
    const SolveReport rep = solve(cp, cfg, backend);
    rec.objective = rep.objective;
    rec.iterations = rep.iterations;
    rec.wall_time_s = rep.wall_time_s;
    rec.status = to_string(rep.status);
    if (rec.nominal > 0.0) rec.por_percent = price_of_robustness(rec.objective, rec.nominal);
  } catch (const std::exception& e) {
    rec.status = std::string("error: ") + e.what();
  }
  return rec;
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const CostMode mode = cfg.effective_cost_mode();
  PdpsConfig pc;
  pc.eps = cfg.eps;
  pc.max_iters = cfg.max_iters;

  struct Run {
    int n;
    int run;
    std::uint64_t seed;
  };
  std::vector<Run> runs;
  for (int n : cfg.n_values)
    for (int k = 0; k < cfg.runs; ++k) runs.push_back({n, k, run_seed(cfg.seed, k)});

  // Nominal values first: one per instance, shared by its whole r grid.
  std::vector<RunRecord> nominal(runs.size());
  const auto nruns = static_cast<long>(runs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long t = 0; t < nruns; ++t) {
    const Run& rn = runs[static_cast<std::size_t>(t)];
    const LotSizingInstance inst = make_instance(mode, rn.n, 0.0, cfg.rho, rn.seed);
    nominal[static_cast<std::size_t>(t)] = solve_instance(inst, pc, rn.seed);
  }

  const std::size_t nr = cfg.r_grid.size();
  std::vector<RunRecord> out(runs.size() * nr);
  const auto ntasks = static_cast<long>(out.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long t = 0; t < ntasks; ++t) {
    const std::size_t ri = static_cast<std::size_t>(t) / nr;
    const std::size_t gi = static_cast<std::size_t>(t) % nr;
    const Run& rn = runs[ri];
    const RunRecord& nom = nominal[ri];
    const double r = cfg.r_grid[gi];
    RunRecord rec;
    if (r < 1e-6 || !std::isfinite(nom.nominal) || !(nom.nominal > 0.0)) {
      rec = nom;
      rec.r = r;
      if (r >= 1e-6) {
        rec.objective = rec.por_percent = std::numeric_limits<double>::quiet_NaN();
        rec.iterations = 0;
        rec.wall_time_s = 0.0;
        rec.status = "nominal failed: " + nom.status;
      }
    } else {
      rec = solve_instance(make_instance(mode, rn.n, r, cfg.rho, rn.seed), pc, rn.seed, nom.nominal);
    }
    out[static_cast<std::size_t>(t)] = rec;
  }
  return out;
}

}  // namespace arpdps
