#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "fpd/agents/action_selection.hpp"
#include "fpd/environment.hpp"

namespace {

using namespace fpd;

std::shared_ptr<const Scenario> scenario(int n_fg, int n_fs) {
  GenConfig g;
  g.n_beams = 2000;
  g.r_inter = 0.03;
  g.r_intra = 0.08;
  return std::make_shared<const Scenario>(generate_scenario(g, n_fg, n_fs));
}

void BM_RandomEpisode(benchmark::State& state) {
  const auto s = scenario(4, 20);
  std::mt19937_64 rng(3);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto st = reset(s, sample_episode(s->beams, static_cast<int>(state.range(0)), ++seed),
                    ActionSpaceKind::Grid, StateRepr{true}, seed);
    while (!st.done()) st.step(agents::random_action(st, rng), RewardKind::Each);
    benchmark::DoNotOptimize(st.count_successful());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RandomEpisode)->Arg(100)->Arg(200);

void BM_BuildState(benchmark::State& state) {
  const auto s = scenario(4, 20);
  std::mt19937_64 rng(3);
  auto st = reset(s, sample_episode(s->beams, 100, 1), ActionSpaceKind::Grid, StateRepr{true}, 1);
  for (int i = 0; i < 50; ++i) st.step(agents::random_action(st, rng), RewardKind::Each);
  for (auto _ : state) benchmark::DoNotOptimize(st.build_state());
}
BENCHMARK(BM_BuildState);

void BM_ConflictMask(benchmark::State& state) {
  const auto s = scenario(4, 20);
  std::mt19937_64 rng(3);
  auto st = reset(s, sample_episode(s->beams, 100, 1), ActionSpaceKind::Grid, StateRepr{false}, 1);
  for (int i = 0; i < 50; ++i) st.step(agents::random_action(st, rng), RewardKind::Each);
  for (auto _ : state) benchmark::DoNotOptimize(st.conflict_mask());
}
BENCHMARK(BM_ConflictMask);

void BM_MonteCarloStep(benchmark::State& state) {
  const auto s = scenario(4, 20);
  std::mt19937_64 rng(3);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    state.PauseTiming();
    auto st = reset(s, sample_episode(s->beams, 100, ++seed), ActionSpaceKind::Grid, StateRepr{false}, seed);
    state.ResumeTiming();
    benchmark::DoNotOptimize(st.step(agents::random_action(st, rng), RewardKind::MonteCarlo));
  }
}
BENCHMARK(BM_MonteCarloStep);

}  // namespace
