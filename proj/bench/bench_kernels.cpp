// Serial reference loops vs the OpenMP kernels on the lung-disease example.

#include <benchmark/benchmark.h>

#include "bookend/models.hpp"
#include "bookend/simulate.hpp"

namespace {

using namespace bookend;

Dataset table1() {
  return Dataset({{"1", Treatment::Control, 514, 1000},
                  {"1", Treatment::Active, 375, 1000},
                  {"2", Treatment::Control, 118, 1000},
                  {"2", Treatment::Active, 81, 1000},
                  {"3", Treatment::Control, 304, 1000},
                  {"3", Treatment::Active, 237, 1000}});
}

ModelSpec spec_for(int kind) {
  ModelSpec spec;
  spec.kind = kind == 0 ? ModelKind::StandardFE : ModelKind::Bookend;
  spec.bookend_low = "2";
  spec.bookend_high = "1";
  return spec;
}

void BM_FitChains(benchmark::State& state, Execution exec) {
  const Dataset data = table1();
  const ModelSpec spec = spec_for(static_cast<int>(state.range(0)));
  SamplerConfig cfg;
  cfg.n_chains = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(fit(data, spec, cfg, exec).effect().mean);
}

void BM_FitSerial(benchmark::State& state) { BM_FitChains(state, Execution::Serial); }
void BM_FitParallel(benchmark::State& state) { BM_FitChains(state, Execution::Parallel); }

void BM_Sweep(benchmark::State& state, Execution exec) {
  SweepOptions options;
  options.replications = static_cast<int>(state.range(0));
  options.sampler.burn_in = 500;
  options.sampler.retained_total = 1500;
  const auto cells = sweep_grid({0.0, 2.0}, {0.5}, {-0.5});
  for (auto _ : state) benchmark::DoNotOptimize(bias_sweep(cells, options, exec).front().fe_mean);
}

void BM_SweepSerial(benchmark::State& state) { BM_Sweep(state, Execution::Serial); }
void BM_SweepParallel(benchmark::State& state) { BM_Sweep(state, Execution::Parallel); }

}  // namespace

BENCHMARK(BM_FitSerial)->ArgsProduct({{0, 1}, {3, 8}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FitParallel)->ArgsProduct({{0, 1}, {3, 8}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepSerial)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepParallel)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
