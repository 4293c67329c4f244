#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "fpd/agents/dqn.hpp"
#include "fpd/agents/ppo.hpp"
#include "fpd/environment.hpp"
#include "fpd/nn/policy.hpp"

namespace fpd::harness {

enum class AgentKind { Random, Dqn, Ppo };

std::string to_string(AgentKind k);
AgentKind parse_agent(const std::string& s);

// "plain" or "lookahead".
std::string state_name(bool lookahead);
bool parse_state(const std::string& s);

struct ExperimentConfig {
  std::string scenario;  // scenario JSON path
  ActionSpaceKind action_space = ActionSpaceKind::Grid;
  bool lookahead = false;
  RewardKind reward = RewardKind::Each;
  double gamma = 0.1;  // overrides the agent sub-configs
  AgentKind agent = AgentKind::Dqn;
  nn::HeadKind head = nn::HeadKind::Mlp;

  int train_beams = 100;
  int test_beams = 100;
  long timesteps = 50000;  // summed over all environments
  int n_envs = 8;
  std::uint64_t seed = 1;

  // Train/test partition of the scenario pool.
  std::uint64_t split_seed = 7;
  double test_fraction = 0.5;

  int eval_episodes = 4;    // per evaluation stream
  // TETRIS moves per beam before NEW is forced: 0 selects default_move_cap,
  // negative disables the cap during training.
  int tetris_move_cap = 0;

  agents::DqnConfig dqn;
  agents::PpoConfig ppo;

  std::string checkpoint_out;
  std::string metrics_out;
  bool record_wallclock = false;

  StateRepr repr() const { return StateRepr{lookahead}; }
  agents::DqnConfig dqn_config() const;
  agents::PpoConfig ppo_config() const;

  // Throws ConfigError naming the violated rule.
  void validate() const;
};

// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

// Move cap to hand to EpisodeOptions (0 = uncapped).
int effective_move_cap(int configured, int n_fg, int n_fs);

}  // namespace fpd::harness
