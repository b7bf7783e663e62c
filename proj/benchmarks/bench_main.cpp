#include <benchmark/benchmark.h>

#include <cmath>

#include "sphstab/carre_du_champ.hpp"
#include "sphstab/flow.hpp"
#include "sphstab/spectral.hpp"
#include "sphstab/stability.hpp"
#include "sphstab/zonal.hpp"

using namespace sphstab;

static void BM_GaussJacobiRule(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  int d = 3;
  for (auto _ : state) {
    // alternate d to defeat the cache
    d = (d == 3) ? 4 : 3;
    benchmark::DoNotOptimize(gauss_jacobi_rule(d, n)->nodes.back());
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_GaussJacobiRule)->RangeMultiplier(2)->Range(64, 1024)->Complexity();

static void BM_ZonalAnalysis(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const ZonalFn f = ZonalFn::from_profile(
        3, [](double z) { return std::exp(0.4 * z); }, L, 1e-30);
    benchmark::DoNotOptimize(f.norm2_sq());
  }
}
BENCHMARK(BM_ZonalAnalysis)->Arg(32)->Arg(64)->Arg(128);

static void BM_DeficitEvaluation(benchmark::State& state) {
  const ZonalFn f = test_family("one_plus_eps_axis", 3, 0.2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(f.grad_norm_sq() - 3.0 * f.entropy(3.0));
  }
}
BENCHMARK(BM_DeficitEvaluation);

static void BM_PhiMp(benchmark::State& state) {
  const CdcParams cdc = make_cdc(3, 3.0, canonical_m(3.0));
  double s = 0.1;
  for (auto _ : state) {
    s = (s < 0.8) ? s + 1e-4 : 0.1;
    benchmark::DoNotOptimize(phi_mp(s, cdc));
  }
}
BENCHMARK(BM_PhiMp);

static void BM_FlowStep(benchmark::State& state) {
  const FlowSolver solver(3, 3.0, canonical_m(3.0), 24, 64);
  FlowState s = solver.make_state(test_family("one_plus_eps_axis", 3, 0.2));
  const double dt = solver.suggested_dt(s);
  for (auto _ : state) {
    solver.step(s, dt);
    benchmark::DoNotOptimize(s.u[0]);
  }
}
BENCHMARK(BM_FlowStep);

static void BM_TaylorConstants(benchmark::State& state) {
  double p = 3.0;
  for (auto _ : state) {
    p = (p < 4.0) ? p + 0.01 : 3.0;
    benchmark::DoNotOptimize(taylor_constants(3, p).K_p);
  }
}
BENCHMARK(BM_TaylorConstants);

BENCHMARK_MAIN();
