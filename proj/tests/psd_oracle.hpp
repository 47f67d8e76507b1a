// Shifted-PSD projection computed by the SDP backend instead of an
// eigendecomposition. With A = B − Ψ, the trace-minimal W satisfying W ⪰ 0
// and W ⪰ A is A₊, so B + P(Ψ − B) = Ψ + W for
//   min tr W  s.t.  V − W = −A,  W ⪰ 0,  V ⪰ 0.
#pragma once

#include "arpdps/conic.hpp"

#include <optional>

namespace arpdps::suite {

inline std::optional<Mat> backend_shifted_psd(const Mat& psi, const Mat& b, double tol = 1e-12) {
  const int n = static_cast<int>(psi.rows());
  const Mat a = b - psi;
  SdpProblem p;
  p.psd_blocks = {n, n};
  for (int i = 0; i < n; ++i) p.objective.add(0, i, i, 1.0);
  for (int col = 0; col < n; ++col)
    for (int row = col; row < n; ++row) {
      LinearConstraint e;
      e.lhs.add(1, row, col, 1.0).add(0, row, col, -1.0);
      e.rhs = -a(row, col);
      p.eq_constraints.push_back(std::move(e));
    }
  const SdpSolution sol = solve_sdp(p, tol);
  if (sol.status != SdpStatus::optimal && sol.status != SdpStatus::inaccurate) return std::nullopt;
  return Mat(psi + sol.block_values[0]);
}

}  // namespace arpdps::suite
