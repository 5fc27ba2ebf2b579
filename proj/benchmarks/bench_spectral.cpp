#include <benchmark/benchmark.h>

#include "kolmo/spectral.hpp"
#include "kolmo/symmetry.hpp"

using namespace kolmo;

static void BM_Step(benchmark::State& state) {
  Grid g;
  g.nx = g.ny = static_cast<int>(state.range(0));
  const FlowParams p{14.4, 2, 0.01};
  FlowIntegrator integ(g, p);
  auto w = random_initial_condition(g, 1);
  for (auto _ : state) {
    w = integ.step(w);
    benchmark::DoNotOptimize(w.coeffs().data());
  }
}
BENCHMARK(BM_Step)->Arg(32)->Arg(64);

static void BM_Diagnostics(benchmark::State& state) {
  const Grid g;
  const FlowParams p;
  const auto w = random_initial_condition(g, 2);
  for (auto _ : state) benchmark::DoNotOptimize(diagnostics(w, p));
}
BENCHMARK(BM_Diagnostics);

static void BM_ForwardTransform(benchmark::State& state) {
  const Grid g;
  const auto v = random_initial_condition(g, 3).to_physical();
  for (auto _ : state) benchmark::DoNotOptimize(SpectralField::from_physical(g, v));
}
BENCHMARK(BM_ForwardTransform);

static void BM_AlignSnapshot(benchmark::State& state) {
  const Grid g;
  const auto v = random_initial_condition(g, 4).to_physical();
  for (auto _ : state) benchmark::DoNotOptimize(align_snapshot(g, v));
}
BENCHMARK(BM_AlignSnapshot);
