// Hot loops of one PDPS iteration. The default versions run with OpenMP; the
// `serial` namespace keeps straightforward single-threaded references that
// the tests and the benchmark compare against.
#pragma once

#include "arpdps/reformulator.hpp"

namespace arpdps::kernels {

/// y ← K x̃
void apply_K(const CompositeProblem& cp, const Vec& xt, Vec& yt);
/// x̃ ← K* ỹ
void apply_K_adjoint(const CompositeProblem& cp, const Vec& yt, Vec& xt);
/// Ψ_i ← Ψ_i − σ(B_i + P_{S+}(Ψ_i/σ − B_i)) for every block, in place.
void prox_G_star(const CompositeProblem& cp, Vec& yt, double sigma);

namespace serial {
void apply_K(const CompositeProblem& cp, const Vec& xt, Vec& yt);
void apply_K_adjoint(const CompositeProblem& cp, const Vec& yt, Vec& xt);
void prox_G_star(const CompositeProblem& cp, Vec& yt, double sigma);
}  // namespace serial

}  // namespace arpdps::kernels
