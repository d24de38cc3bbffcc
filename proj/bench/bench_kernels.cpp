#include <benchmark/benchmark.h>

#include <random>

#include "spgg/baselines.hpp"
#include "spgg/kernels.hpp"
#include "spgg/mappo.hpp"

using namespace spgg;

namespace {

StrategyGrid random_grid(std::size_t L) {
  LatticeConfig cfg;
  cfg.side = L;
  cfg.init = InitMode::Bernoulli;
  cfg.seed = 5;
  return init_grid(cfg);
}

void BM_PayoffParallel(benchmark::State& state) {
  const auto g = random_grid(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::payoff_field(g, 4.4));
}

void BM_PayoffSerial(benchmark::State& state) {
  const auto g = random_grid(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::payoff_field(g, 4.4));
}

void BM_FermiParallel(benchmark::State& state) {
  const auto g = random_grid(static_cast<std::size_t>(state.range(0)));
  std::uint64_t t = 0;
  for (auto _ : state) benchmark::DoNotOptimize(fermi_step(g, 4.4, 0.5, 1, t++));
}

void BM_FermiSerial(benchmark::State& state) {
  const auto g = random_grid(static_cast<std::size_t>(state.range(0)));
  std::uint64_t t = 0;
  for (auto _ : state) benchmark::DoNotOptimize(serial::fermi_step(g, 4.4, 0.5, 1, t++));
}

struct LossFixture {
  explicit LossFixture(std::size_t L) {
    LatticeConfig lat;
    lat.side = L;
    lat.init = InitMode::Bernoulli;
    Trainer trainer(lat, cfg, Algorithm::MappoLcr);
    buffer = trainer.collect_rollout(1);
    batch = compute_gae(buffer, cfg.gamma, cfg.gae_lambda);
    nets = trainer.networks();
  }
  TrainConfig cfg;
  RolloutBuffer buffer;
  AdvantageBatch batch;
  ActorCritic nets;
};

void BM_LossGrouped(benchmark::State& state) {
  LossFixture f(static_cast<std::size_t>(state.range(0)));
  LossGradients grads;
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_loss(f.nets, f.buffer, f.batch, f.cfg, &grads));
}

void BM_LossReference(benchmark::State& state) {
  LossFixture f(static_cast<std::size_t>(state.range(0)));
  LossGradients grads;
  for (auto _ : state) benchmark::DoNotOptimize(reference::evaluate_loss(f.nets, f.buffer, f.batch, f.cfg, &grads));
}

}  // namespace

BENCHMARK(BM_PayoffParallel)->Arg(50)->Arg(200)->Arg(800);
BENCHMARK(BM_PayoffSerial)->Arg(50)->Arg(200)->Arg(800);
BENCHMARK(BM_FermiParallel)->Arg(50)->Arg(200)->Arg(800);
BENCHMARK(BM_FermiSerial)->Arg(50)->Arg(200)->Arg(800);
BENCHMARK(BM_LossGrouped)->Arg(20)->Arg(50);
BENCHMARK(BM_LossReference)->Arg(20)->Arg(50);

BENCHMARK_MAIN();
