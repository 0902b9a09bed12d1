#include <benchmark/benchmark.h>

#include "fbcom/sweep.hpp"

using namespace fbcom;

namespace {

SweepSpec bench_spec(int n) {
  SweepSpec s = figure_preset("fig4", n, n);
  s.outputs = {Measure::E_N};
  return s;
}

void BM_SweepSerial(benchmark::State& state) {
  const SweepSpec s = bench_spec(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_sweep_serial(s));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

void BM_SweepOpenMP(benchmark::State& state) {
  const SweepSpec s = bench_spec(static_cast<int>(state.range(0)));
  SweepOptions opt;
  opt.workers = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(run_sweep(s, opt));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

}  // namespace

BENCHMARK(BM_SweepSerial)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SweepOpenMP)->Args({8, 1})->Args({8, 2})->Args({8, 4})->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
