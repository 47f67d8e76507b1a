// OpenMP kernels against the serial references on the lot-sizing operator,
// N = 2..12 (m = N² + N + 1 blocks of size N + 1).
#include "arpdps/kernels.hpp"
#include "arpdps/lotsizing.hpp"

#include <benchmark/benchmark.h>

#include <map>
#include <memory>
#include <random>

using namespace arpdps;

namespace {

struct Fixture {
  std::unique_ptr<CompositeProblem> cp;
  Vec x, y;
};

const Fixture& fixture(int n) {
  static std::map<int, Fixture> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  Fixture f;
  f.cp = std::make_unique<CompositeProblem>(build_lotsizing(fixed_linear_instance(n)));
  std::mt19937_64 rng(static_cast<std::uint64_t>(n));
  std::normal_distribution<double> g;
  f.x.resize(f.cp->dims().dim_x);
  f.y.resize(f.cp->dims().dim_y);
  for (Index i = 0; i < f.x.size(); ++i) f.x[i] = g(rng);
  for (Index i = 0; i < f.y.size(); ++i) f.y[i] = g(rng);
  return cache.emplace(n, std::move(f)).first->second;
}

template <void (*Fn)(const CompositeProblem&, const Vec&, Vec&)>
void run_map(benchmark::State& st, bool adjoint) {
  const auto& f = fixture(static_cast<int>(st.range(0)));
  Vec out;
  for (auto _ : st) {
    Fn(*f.cp, adjoint ? f.y : f.x, out);
    benchmark::DoNotOptimize(out.data());
  }
  st.counters["blocks"] = static_cast<double>(f.cp->dims().m);
}

void BM_ApplyK_Omp(benchmark::State& st) { run_map<kernels::apply_K>(st, false); }
void BM_ApplyK_Serial(benchmark::State& st) { run_map<kernels::serial::apply_K>(st, false); }
void BM_Adjoint_Omp(benchmark::State& st) { run_map<kernels::apply_K_adjoint>(st, true); }
void BM_Adjoint_Serial(benchmark::State& st) { run_map<kernels::serial::apply_K_adjoint>(st, true); }

template <void (*Fn)(const CompositeProblem&, Vec&, double)>
void run_prox(benchmark::State& st) {
  const auto& f = fixture(static_cast<int>(st.range(0)));
  Vec y = f.y;
  for (auto _ : st) {
    y = f.y;
    Fn(*f.cp, y, 0.5);
    benchmark::DoNotOptimize(y.data());
  }
  st.counters["blocks"] = static_cast<double>(f.cp->dims().m);
}

void BM_ProxG_Omp(benchmark::State& st) { run_prox<kernels::prox_G_star>(st); }
void BM_ProxG_Serial(benchmark::State& st) { run_prox<kernels::serial::prox_G_star>(st); }

}  // namespace

#define ARPDPS_SIZES DenseRange(2, 12, 2)->Unit(benchmark::kMicrosecond)
BENCHMARK(BM_ApplyK_Omp)->ARPDPS_SIZES;
BENCHMARK(BM_ApplyK_Serial)->ARPDPS_SIZES;
BENCHMARK(BM_Adjoint_Omp)->ARPDPS_SIZES;
BENCHMARK(BM_Adjoint_Serial)->ARPDPS_SIZES;
BENCHMARK(BM_ProxG_Omp)->ARPDPS_SIZES;
BENCHMARK(BM_ProxG_Serial)->ARPDPS_SIZES;

BENCHMARK_MAIN();
