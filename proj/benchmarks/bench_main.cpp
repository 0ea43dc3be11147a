#include <benchmark/benchmark.h>

#include "hdsim/defenses.hpp"
#include "hdsim/hypergame.hpp"
#include "hdsim/learning.hpp"

using namespace hdsim;

namespace {

// Worst case for placement: no honey drone ever finds a feasible group.
void BM_DeployHoneyDrones(benchmark::State& state) {
  const int nh = static_cast<int>(state.range(0));
  const int nm = static_cast<int>(state.range(1));
  std::vector<DroneRecord> hds(static_cast<std::size_t>(nh));
  std::vector<DroneRecord> mds(static_cast<std::size_t>(nm));
  for (int k = 0; k < nh; ++k) {
    hds[static_cast<std::size_t>(k)].id = 1000 + k;
    hds[static_cast<std::size_t>(k)].kind = DroneKind::Honey;
    hds[static_cast<std::size_t>(k)].pos = {600.0 * k, 20000.0, 50.0};
  }
  for (int k = 0; k < nm; ++k) {
    mds[static_cast<std::size_t>(k)].id = k;
    mds[static_cast<std::size_t>(k)].pos = {600.0 * k, 0.0, 50.0};
  }
  const auto& table = default_range_table();
  for (auto _ : state) benchmark::DoNotOptimize(deploy_honey_drones(hds, mds, table));
  state.SetComplexityN(static_cast<benchmark::IterationCount>(nh) * nm);
}
BENCHMARK(BM_DeployHoneyDrones)
    ->ArgsProduct({{5, 10, 20}, {15, 30, 60}})
    ->Complexity(benchmark::oN);

void BM_PolicyForward(benchmark::State& state) {
  AgentConfig c;
  c.state_dim = 26;
  Rng rng(1);
  ActorCriticAgent agent(c, rng);
  std::vector<double> s(26, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(agent.probs(s));
}
BENCHMARK(BM_PolicyForward);

void BM_TrainStep(benchmark::State& state) {
  AgentConfig c;
  c.state_dim = 26;
  Rng rng(2);
  ActorCriticAgent agent(c, rng);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int k = 0; k < 256; ++k) {
    Transition t;
    for (int d = 0; d < 26; ++d) {
      t.state.push_back(n(rng));
      t.next_state.push_back(n(rng));
    }
    t.action = k % 10;
    t.reward = n(rng);
    agent.remember(std::move(t));
  }
  for (auto _ : state) benchmark::DoNotOptimize(agent.train_step(rng));
}
BENCHMARK(BM_TrainStep);

void BM_HeuSelection(benchmark::State& state) {
  HypergameContext ctx(Role::Defender, HypergameParams{});
  std::array<int, kNumStrategies> conn{};
  for (int j = 0; j < kNumStrategies; ++j) conn[static_cast<std::size_t>(j)] = j;
  Rng rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(ctx.select_strategy(conn, 20, {}, rng));
}
BENCHMARK(BM_HeuSelection);

void BM_StepRound(benchmark::State& state) {
  WorldConfig c;  // full-scale fleet
  c.max_rounds = 1'000'000;
  c.scan_units_per_cell = 1'000'000;
  Rng rng(4);
  World world(c, rng);
  const AttackerDecision attacker = [](const AttackerObservation&) { return StrategyIndex{5}; };
  for (auto _ : state) {
    if (world.terminated()) {
      state.PauseTiming();
      world = World(c, rng);
      state.ResumeTiming();
    }
    benchmark::DoNotOptimize(world.step_round(StrategyIndex{7}, attacker, rng));
  }
}
BENCHMARK(BM_StepRound);

}  // namespace

BENCHMARK_MAIN();
