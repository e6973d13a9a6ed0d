// Serial reference loop vs OpenMP kernel on the three data-parallel hot
// spots. Arg 0 selects the mode: 0 = serial, 1 = parallel.
#include <benchmark/benchmark.h>

#include "fractalscape/envs.hpp"
#include "fractalscape/holder.hpp"
#include "fractalscape/landscape.hpp"
#include "fractalscape/policygrad.hpp"
#include "fractalscape/rng.hpp"
#include "fractalscape/rollout.hpp"

namespace {

using namespace fractalscape;

Exec mode(const benchmark::State& state) { return state.range(0) == 0 ? Exec::serial : Exec::parallel; }

ParamVector acrobot_theta() {
  RngStream rng(0, StreamTag::init, 0);
  return ParamVector::random_normal(PolicySpec::tanh_net(4, 1, 8, true), rng);
}

void BM_HolderSampling(benchmark::State& state) {
  const EnvModel env = EnvModel::make(EnvKind::acrobot);
  const ParamVector theta = acrobot_theta();
  const State s0 = env.default_initial_state();
  const Objective J = [&](std::span<const double> x) {
    return discounted_cost(env, theta.with_values({x.begin(), x.end()}), s0, 0.9, 1000);
  };
  const std::size_t frozen[] = {*theta.log_sigma_index()};
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_objective(J, theta.values(), 1e-3, 200, 1, frozen, mode(state)));
  }
  state.SetItemsProcessed(state.iterations() * 200);
}
BENCHMARK(BM_HolderSampling)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_LogisticSweep(benchmark::State& state) {
  const EnvModel env = EnvModel::make(EnvKind::logistic);
  RolloutConfig cfg;
  cfg.gamma = 0.99;
  cfg.horizon = 1000;
  cfg.s0 = env.default_initial_state();
  cfg.exec = mode(state);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sweep(env, PolicySpec::linear(), 3.3, 3.9, 2000, cfg));
  }
  state.SetItemsProcessed(state.iterations() * 2000);
}
BENCHMARK(BM_LogisticSweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_GradientEpisodes(benchmark::State& state) {
  const EnvModel env = EnvModel::make(EnvKind::acrobot);
  const ParamVector theta = acrobot_theta();
  GradConfig cfg;
  cfg.n_episodes = 64;
  cfg.gamma = 0.9;
  cfg.horizon = 1000;
  cfg.s0 = env.default_initial_state();
  cfg.exec = mode(state);
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_gradient(env, theta, cfg));
  }
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_GradientEpisodes)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
