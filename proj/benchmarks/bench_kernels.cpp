// Serial-vs-OpenMP comparison for the two data-parallel kernels: minibatch
// gradient accumulation and independent evaluation-window DP solves. Both
// parallel paths are bit-identical to their serial references; these
// benchmarks measure the speedup only.
#include <benchmark/benchmark.h>

#include <vector>

#include "bess/dp.hpp"
#include "bess/dqn.hpp"
#include "bess/rng.hpp"

namespace {

using namespace bess;

struct GradientFixture {
  BatteryConfig cfg;
  QNetwork net = init_random(default_layer_sizes(), 7);
  Normalizer norm = identity_normalizer(3);
  std::vector<Transition> pool;
  std::vector<const Transition*> batch;
  std::vector<double> targets;
  std::vector<Gradient> scratch;
  Gradient out = make_zero_gradient(net);

  explicit GradientFixture(int batch_size) {
    Rng rng(11);
    for (int i = 0; i < batch_size; ++i) {
      Transition t;
      t.state = EnvState{rng.uniform(-40.0, 60.0), rng.uniform(0.0, 0.2),
                         rng.uniform(0.0, cfg.capacity_kwh)};
      t.action = action_from_index(static_cast<int>(rng.uniform_int(3)));
      t.reward = rng.uniform(-1.0, 1.0);
      t.next_state = EnvState{rng.uniform(-40.0, 60.0), rng.uniform(0.0, 0.2),
                              rng.uniform(0.0, cfg.capacity_kwh)};
      pool.push_back(t);
    }
    for (const auto& t : pool) {
      batch.push_back(&t);
      targets.push_back(td_target(net, norm, t, 0.99));
    }
  }
};

void bench_batch_gradient(benchmark::State& state, bool parallel) {
  GradientFixture fx(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    batch_gradient(fx.net, fx.norm, fx.batch, fx.targets, parallel, fx.scratch,
                   fx.out);
    benchmark::DoNotOptimize(fx.out.weights[0][0]);
  }
}

void BM_BatchGradientSerial(benchmark::State& state) {
  bench_batch_gradient(state, false);
}
void BM_BatchGradientParallel(benchmark::State& state) {
  bench_batch_gradient(state, true);
}
BENCHMARK(BM_BatchGradientSerial)->Arg(64)->Arg(256);
BENCHMARK(BM_BatchGradientParallel)->Arg(64)->Arg(256);

struct WindowFixture {
  BatteryConfig cfg;
  DPConfig dp;
  std::vector<Scenario> windows;

  WindowFixture(int n_windows, int horizon) {
    dp.soc_grid_points = 501;
    Rng rng(23);
    for (int w = 0; w < n_windows; ++w) {
      Scenario sc;
      sc.slot_hours = cfg.slot_hours;
      for (int t = 0; t < horizon; ++t) {
        sc.load_kw.push_back(rng.uniform(0.0, 60.0));
        sc.pv_kw.push_back(rng.uniform(0.0, 40.0));
        sc.price_per_kwh.push_back(rng.uniform(0.01, 0.2));
      }
      windows.push_back(std::move(sc));
    }
  }
};

void bench_window_solves(benchmark::State& state, bool parallel) {
  WindowFixture fx(static_cast<int>(state.range(0)), 96);
  std::vector<double> costs(fx.windows.size());
  for (auto _ : state) {
    const int n = static_cast<int>(fx.windows.size());
#pragma omp parallel for schedule(static) if (parallel)
    for (int w = 0; w < n; ++w)
      costs[w] =
          dp_optimal(fx.cfg, fx.windows[w], fx.dp, fx.cfg.capacity_kwh / 2)
              .cost;
    benchmark::DoNotOptimize(costs.data());
  }
}

void BM_WindowSolvesSerial(benchmark::State& state) {
  bench_window_solves(state, false);
}
void BM_WindowSolvesParallel(benchmark::State& state) {
  bench_window_solves(state, true);
}
BENCHMARK(BM_WindowSolvesSerial)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WindowSolvesParallel)
    ->Arg(4)
    ->Arg(8)
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
