#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fpd/harness/config.hpp"
#include "fpd/harness/train.hpp"

namespace fpd::harness {

// Cross-product axes; every axis must be non-empty.
struct SweepSpec {
  ExperimentConfig base;
  std::vector<ActionSpaceKind> actions{ActionSpaceKind::Grid};
  std::vector<bool> states{false};  // lookahead off / on
  std::vector<RewardKind> rewards{RewardKind::Each};
  std::vector<double> gammas{0.1};
  std::vector<int> train_beams{100};
  std::vector<AgentKind> agents{AgentKind::Dqn};
  std::vector<nn::HeadKind> heads{nn::HeadKind::Mlp};

  std::size_t size() const;
  void validate() const;
  // Combination `index` in row-major order over the axes listed above.
  ExperimentConfig cell(std::size_t index) const;
};

// {"base": {...experiment config...}, "axes": {"action_space": [...], "state": [...],
//  "reward": [...], "gamma": [...], "train_beams": [...], "agent": [...], "head": [...]}}
SweepSpec sweep_spec_from_json(const std::string& text);
SweepSpec load_sweep_spec(const std::filesystem::path& path);

struct SweepRow {
  ExperimentConfig config;
  std::optional<double> mean_b;  // absent when the cell failed
  double std_b = 0.0;
  std::string error;
};

inline constexpr const char* kSweepHeader =
    "action_space,state,reward,gamma,train_beams,agent,head,timesteps,seed,mean_B,std_B";

std::string sweep_row_csv(const SweepRow& row);

// Trains and evaluates every combination on the test pool. A failing cell is
// recorded with an error marker and the sweep moves on. `on_row` sees each
// row as soon as it finishes.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, const PoolData& pools,
                                const std::function<void(const SweepRow&)>& on_row = {});

}  // namespace fpd::harness
