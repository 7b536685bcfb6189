#include <benchmark/benchmark.h>

#include "bipot/kernel.hpp"
#include "bipot/lorentz.hpp"
#include "bipot/operator.hpp"
#include "bipot/verify.hpp"

using namespace bipot;

namespace {

void BM_KernelSubordination(benchmark::State& state) {
  const BesselKernel g(PotentialParams{3, 2.0});
  double r = 0.5;
  for (auto _ : state) benchmark::DoNotOptimize(g(r));
}
BENCHMARK(BM_KernelSubordination);

void BM_KernelTableLookup(benchmark::State& state) {
  const auto table = shared_kernel_table(PotentialParams{1, 0.5});
  double r = 1e-3;
  for (auto _ : state) {
    benchmark::DoNotOptimize((*table)(r));
    r = r < 30.0 ? r * 1.01 : 1e-3;
  }
}
BENCHMARK(BM_KernelTableLookup);

void BM_KernelTableBuild(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(KernelTable(PotentialParams{1, 0.5}));
}
BENCHMARK(BM_KernelTableBuild)->Unit(benchmark::kMillisecond);

void BM_Bilinear(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const PotentialParams params{n, 0.5 * n};
  const PotentialEvaluator ev(params, QuadratureSpec{});
  const auto f = AnalyticFunction::indicator(1.0);
  const auto g = AnalyticFunction::smooth_bump(0.5, 1.0);
  Point x = Point::origin(n);
  x[0] = 0.3;
  for (auto _ : state) benchmark::DoNotOptimize(ev.bilinear(f, g, x).value);
}
BENCHMARK(BM_Bilinear)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMicrosecond);

void BM_LorentzNorm(benchmark::State& state) {
  const auto grid = GridFunction::sample(AnalyticFunction::smooth_bump(0.5, 1.0), 1, 2.0,
                                         static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(lorentz_norm_both(grid, {2.0, 1.0}));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LorentzNorm)->RangeMultiplier(4)->Range(1 << 10, 1 << 18)->Complexity()
    ->Unit(benchmark::kMicrosecond);

void BM_Experiment(benchmark::State& state, const char* id) {
  for (auto _ : state)
    benchmark::DoNotOptimize(
        make_experiment_plan(id, PotentialParams{1, 0.5}, std::nullopt, {}).run().verdict);
}
BENCHMARK_CAPTURE(BM_Experiment, scaling_upper, "scaling_upper")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Experiment, critical_divergence, "critical_divergence")
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
