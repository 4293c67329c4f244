#include <benchmark/benchmark.h>

#include <random>

#include "fpd/nn/adam.hpp"
#include "fpd/nn/policy.hpp"

namespace {

using namespace fpd;

nn::Tensor<float> random_obs(const nn::PolicyConfig& cfg, int batch) {
  nn::Tensor<float> obs({batch, cfg.n_fg, cfg.n_fs, cfg.in_channels});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (float& v : obs.values()) v = u(rng) < 0.3f ? 1.0f : 0.0f;
  return obs;
}

nn::PolicyConfig grid_config(int n_fg, int n_fs) {
  return nn::PolicyConfig::for_env(ActionSpaceKind::Grid, StateRepr{true}, n_fg, n_fs);
}

void BM_PolicyForward(benchmark::State& state) {
  const auto cfg = grid_config(static_cast<int>(state.range(1)), static_cast<int>(state.range(2)));
  const nn::PolicyNet<float> net(cfg, 1);
  const auto obs = random_obs(cfg, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(obs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PolicyForward)->Args({8, 4, 20})->Args({32, 4, 20})->Args({8, 8, 40})->Unit(benchmark::kMillisecond);

void BM_PolicyForwardBackward(benchmark::State& state) {
  const auto cfg = grid_config(static_cast<int>(state.range(1)), static_cast<int>(state.range(2)));
  const nn::PolicyNet<float> net(cfg, 1);
  const auto obs = random_obs(cfg, static_cast<int>(state.range(0)));
  nn::NetParams<float> grads = net.params().zeros_like();
  for (auto _ : state) {
    nn::PolicyCache<float> cache;
    const auto out = net.forward(obs, nullptr, &cache);
    nn::Tensor<float> d(out.outputs.shape());
    d.fill(1e-3f);
    net.backward(cache, d, nullptr, grads);
    benchmark::DoNotOptimize(grads);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PolicyForwardBackward)->Args({32, 4, 20})->Args({32, 8, 40})->Unit(benchmark::kMillisecond);

void BM_AdamStep(benchmark::State& state) {
  const auto cfg = grid_config(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  nn::PolicyNet<float> net(cfg, 1);
  nn::NetParams<float> grads = net.params().zeros_like();
  for (auto& t : grads.tensors) t.fill(1e-4f);
  nn::Adam<float> opt(net.params(), nn::AdamConfig{});
  for (auto _ : state) opt.step(net.params(), grads);
}
BENCHMARK(BM_AdamStep)->Args({4, 20})->Args({8, 40})->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
