#include <benchmark/benchmark.h>

#include "wfldp/action_minimizer.hpp"
#include "wfldp/dirichlet_equilibrium.hpp"
#include "wfldp/path_action.hpp"
#include "wfldp/wf_simulator.hpp"

using namespace wfldp;

namespace {

const ModelParams kParams(1.0, SimplexPoint({0.2, 0.3, 0.5}), 0.05);
const FitnessMatrix kV = FitnessMatrix::from_rows({{1, 0, 0.5}, {0, 0.3, 0}, {0.5, 0, 0}});

PathGrid wiggly(std::size_t M) {
  return PathGrid::sample(1.0, M, 3, [](double t) {
    const double a = 0.2 + 0.1 * std::sin(3 * t), b = 0.3 + 0.1 * std::cos(2 * t);
    return SimplexPoint({a, b, 1 - a - b});
  });
}

void BM_ActionSelective(benchmark::State& state) {
  const auto path = wiggly(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(action_selective(kParams, kV, path));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ActionSelective)->Arg(64)->Arg(1024)->Arg(16384);

void BM_ActionGradient(benchmark::State& state) {
  const auto path = wiggly(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(action_gradient(kParams, kV, path));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ActionGradient)->Arg(64)->Arg(1024);

void BM_SimulatePath(benchmark::State& state) {
  SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 1.0;
  cfg.record_stride = 100;
  std::uint64_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate(kParams, kV, cfg, kParams.p(), i++));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cfg.steps()));
}
BENCHMARK(BM_SimulatePath);

void BM_DirichletSample(benchmark::State& state) {
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(dirichlet_sample(kParams, 10000, seed++));
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_DirichletSample);

void BM_MinimizeN2(benchmark::State& state) {
  const ModelParams half(1.0, SimplexPoint({0.5, 0.5}), 0.1);
  MinimizeSpec spec{half.p(), SimplexPoint({0.8, 0.2})};
  spec.horizon = 5.0;
  spec.knots = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(minimize_action(half, spec));
}
BENCHMARK(BM_MinimizeN2)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
