#include <benchmark/benchmark.h>

#include "slowfast/analysis.hpp"
#include "slowfast/estimators.hpp"
#include "slowfast/macro.hpp"
#include "slowfast/micro.hpp"
#include "slowfast/model.hpp"
#include "slowfast/rng.hpp"

using namespace slowfast;

namespace {

const LinearParams kParams{-10.0, 4.0, 0.5, 1.2};

void BM_normal_stream(benchmark::State& state) {
  GaussianStream s(7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(s.next_normal());
  }
}
BENCHMARK(BM_normal_stream);

void BM_em_chain(benchmark::State& state) {
  const Model m = make_linear_model(kParams, 1e-3);
  const MicroConfig cfg{1e-3, static_cast<int>(state.range(0)), false};
  std::uint64_t seed = 1;
  for (auto _ : state) {
    GaussianStream s(seed++);
    benchmark::DoNotOptimize(em_chain(m, 1.0, 1.0, cfg, s));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_em_chain)->Arg(50)->Arg(500);

void BM_mala_chain(benchmark::State& state) {
  const Model m = make_linear_model(kParams, 1e-3);
  const MicroConfig cfg{1e-3, static_cast<int>(state.range(0)), true};
  std::uint64_t seed = 1;
  for (auto _ : state) {
    GaussianStream s(seed++);
    benchmark::DoNotOptimize(mala_chain(m, 1.0, 1.0, cfg, s));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_mala_chain)->Arg(50);

void BM_vr_estimate(benchmark::State& state) {
  const Model m = make_linear_model(kParams, 1e-3);
  const MicroConfig cfg{1e-3, static_cast<int>(state.range(0)), false};
  const double F_prev = m.exact_f_bar(1.0);
  const double X_cur = fe_step(1.0, F_prev, 0.02);
  std::uint64_t seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(vr_estimate(m, 1.0, X_cur, F_prev, 1.0, cfg, seed++));
  }
  state.SetItemsProcessed(state.iterations() * 2 * state.range(0));
}
BENCHMARK(BM_vr_estimate)->Arg(50);

void BM_vr_trajectory(benchmark::State& state) {
  const Model m = make_linear_model(kParams, 1e-3);
  const MicroConfig micro{nobias_micro_step(kParams.A, 1e-3), 50, false};
  const MacroConfig macro{0.02, 1.0, 1.0, 1.0};
  std::uint64_t seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_vr_trajectory(m, macro, micro, InitSpec::estimated(500),
                                               ReinitPolicy::none(), SeedSchedule{seed++}));
  }
}
BENCHMARK(BM_vr_trajectory);

void BM_kernel_density(benchmark::State& state) {
  GaussianStream s(3);
  std::vector<double> samples;
  for (int i = 0; i < 500; ++i) samples.push_back(s.next_normal());
  const std::vector<double> grid = kde_grid(samples);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernel_density(samples, grid));
  }
}
BENCHMARK(BM_kernel_density);

}  // namespace

BENCHMARK_MAIN();
