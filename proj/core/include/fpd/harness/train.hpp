#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fpd/harness/config.hpp"
#include "fpd/nn/policy.hpp"
#include "fpd/scenario.hpp"

namespace fpd::harness {

inline constexpr long kMetricsInterval = 1000;

struct MetricsRow {
  long step = 0;
  long episodes = 0;
  double mean_b = 0.0;  // mean B of episodes finished since the previous row, else the previous value
  double loss = 0.0;    // mean loss over updates since the previous row
  double epsilon = 0.0;
  long wallclock_ms = 0;  // 0 unless record_wallclock is set
};

inline constexpr const char* kMetricsHeader = "step,episodes,mean_B,loss,epsilon,wallclock_ms";

std::string metrics_to_csv(const std::vector<MetricsRow>& rows);

struct TrainResult {
  long steps = 0;
  long episodes = 0;
  std::vector<MetricsRow> metrics;
  std::optional<nn::PolicyNet<float>> policy;  // absent for the random agent
};

struct PoolData {
  std::shared_ptr<const Scenario> scenario;
  PoolSplit split;
};

// Loads nothing: splits the given scenario with the config's split seed and fraction.
PoolData prepare_pools(std::shared_ptr<const Scenario> scenario, const ExperimentConfig& cfg);

// Runs exactly cfg.timesteps environment steps summed over cfg.n_envs
// lockstep environments. Each episode draws a fresh beam sample from the
// train pool. Writes cfg.metrics_out and cfg.checkpoint_out when set; on a
// numeric failure the checkpoint holds the last good parameters before the
// error propagates.
TrainResult train(const ExperimentConfig& cfg, const PoolData& pools);

// Loads cfg.scenario, then trains.
TrainResult train(const ExperimentConfig& cfg);

}  // namespace fpd::harness
