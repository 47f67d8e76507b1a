#include "arpdps/conic.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace arpdps {

namespace {

void check_functional(const LinearFunctional& f, const SdpProblem& p, const std::string& where) {
  for (const auto& e : f.blocks) {
    if (e.block < 0 || e.block >= static_cast<int>(p.psd_blocks.size()))
      throw std::invalid_argument(where + ": block index " + std::to_string(e.block) + " out of range");
    const int n = p.psd_blocks[static_cast<std::size_t>(e.block)];
    if (e.row < 0 || e.row >= n || e.col < 0 || e.col >= n)
      throw std::invalid_argument(where + ": entry (" + std::to_string(e.row) + "," + std::to_string(e.col) +
                                  ") outside block of size " + std::to_string(n));
    if (!std::isfinite(e.value)) throw std::invalid_argument(where + ": non-finite coefficient");
  }
  for (const auto& e : f.scalars) {
    if (e.index < 0 || e.index >= p.free_vars)
      throw std::invalid_argument(where + ": free variable " + std::to_string(e.index) + " out of range");
    if (!std::isfinite(e.value)) throw std::invalid_argument(where + ": non-finite coefficient");
  }
}

}  // namespace

void SdpProblem::validate() const {
  if (free_vars < 0) throw std::invalid_argument("SdpProblem: negative free variable count");
  if (psd_blocks.empty() && free_vars == 0) throw std::invalid_argument("SdpProblem: no variables");
  for (int n : psd_blocks)
    if (n < 1) throw std::invalid_argument("SdpProblem: PSD block size must be positive");
  if (!std::isfinite(objective_offset)) throw std::invalid_argument("SdpProblem: non-finite objective offset");
  check_functional(objective, *this, "objective");
  for (std::size_t i = 0; i < eq_constraints.size(); ++i) {
    check_functional(eq_constraints[i].lhs, *this, "equality " + std::to_string(i));
    if (!std::isfinite(eq_constraints[i].rhs)) throw std::invalid_argument("SdpProblem: non-finite rhs");
  }
  for (std::size_t i = 0; i < ineq_constraints.size(); ++i) {
    check_functional(ineq_constraints[i].lhs, *this, "inequality " + std::to_string(i));
    if (!std::isfinite(ineq_constraints[i].rhs)) throw std::invalid_argument("SdpProblem: non-finite rhs");
  }
}

std::string to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::optimal: return "optimal";
    case SdpStatus::inaccurate: return "inaccurate";
    case SdpStatus::infeasible: return "infeasible";
    case SdpStatus::unbounded: return "unbounded";
    case SdpStatus::error: return "error";
  }
  return "unknown";
}

std::shared_ptr<const SdpBackend> default_backend() {
  static const auto backend = std::make_shared<const InteriorPointBackend>();
  return backend;
}

SdpSolution solve_sdp(const SdpProblem& p, double tol, const SdpBackend* backend) {
  if (!(tol > 0.0) || tol > 1e-2) throw std::invalid_argument("solve_sdp: tolerance must lie in (0, 1e-2]");
  p.validate();
  if (backend == nullptr) backend = default_backend().get();
  return backend->solve(p, tol);
}

SdpProblem warm_hint(SdpProblem p, const SdpSolution& prior) {
  if (prior.block_values.size() != p.psd_blocks.size())
    throw std::invalid_argument("warm_hint: block count mismatch");
  for (std::size_t b = 0; b < p.psd_blocks.size(); ++b) {
    const auto n = static_cast<Index>(p.psd_blocks[b]);
    if (prior.block_values[b].rows() != n || prior.block_values[b].cols() != n)
      throw std::invalid_argument("warm_hint: block " + std::to_string(b) + " has the wrong shape");
    if (!prior.dual_blocks.empty() && (prior.dual_blocks[b].rows() != n || prior.dual_blocks[b].cols() != n))
      throw std::invalid_argument("warm_hint: dual block " + std::to_string(b) + " has the wrong shape");
  }
  if (!prior.dual_blocks.empty() && prior.dual_blocks.size() != p.psd_blocks.size())
    throw std::invalid_argument("warm_hint: dual block count mismatch");
  if (prior.scalar_values.size() != p.free_vars) throw std::invalid_argument("warm_hint: free variable count mismatch");
  if (prior.eq_duals.size() != static_cast<Index>(p.eq_constraints.size()) ||
      prior.ineq_duals.size() != static_cast<Index>(p.ineq_constraints.size()))
    throw std::invalid_argument("warm_hint: constraint count mismatch");
  p.hint = SdpHint{prior.block_values, prior.scalar_values, prior.dual_blocks, prior.eq_duals, prior.ineq_duals};
  return p;
}

double evaluate(const LinearFunctional& f, const std::vector<Mat>& blocks, const Vec& scalars) {
  double s = 0.0;
  for (const auto& e : f.blocks) s += e.value * blocks.at(static_cast<std::size_t>(e.block))(e.row, e.col);
  for (const auto& e : f.scalars) s += e.value * scalars[e.index];
  return s;
}

void dump_sparse(const SdpProblem& p, std::ostream& os) {
  auto emit = [&os](const char* section, std::size_t idx, const LinearFunctional& f) {
    for (const auto& e : f.blocks)
      os << section << ' ' << idx << ' ' << e.block << ' ' << e.row << ' ' << e.col << ' ' << e.value << '\n';
    for (const auto& e : f.scalars) os << section << ' ' << idx << " -1 " << e.index << " 0 " << e.value << '\n';
  };
  emit("obj", 0, p.objective);
  for (std::size_t i = 0; i < p.eq_constraints.size(); ++i) {
    emit("eq", i, p.eq_constraints[i].lhs);
    os << "eq_rhs " << i << " -1 0 0 " << p.eq_constraints[i].rhs << '\n';
  }
  for (std::size_t i = 0; i < p.ineq_constraints.size(); ++i) {
    emit("ineq", i, p.ineq_constraints[i].lhs);
    os << "ineq_rhs " << i << " -1 0 0 " << p.ineq_constraints[i].rhs << '\n';
  }
}

}  // namespace arpdps
