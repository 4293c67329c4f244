#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "fpd/agents/action_selection.hpp"
#include "fpd/agents/replay_buffer.hpp"
#include "fpd/nn/adam.hpp"
#include "fpd/nn/policy.hpp"

namespace fpd::agents {

struct DqnConfig {
  double gamma = 0.1;
  double learning_rate = 1e-4;
  int batch_size = 32;
  int buffer_capacity = 100000;
  long target_sync = 1000;     // environment steps between target copies
  EpsilonSchedule epsilon{};
  long learning_starts = 1000; // environment steps before the first update
  int train_freq = 4;          // environment steps per gradient step
  double huber_delta = 1.0;
  double max_grad_norm = 10.0; // <= 0 disables clipping

  void validate() const;
};

// y = r + gamma * max_a' Q_target(s', a') for non-terminal transitions, y = r otherwise.
std::vector<float> td_target(const std::vector<const Transition*>& batch,
                             const nn::PolicyNet<float>& target, double gamma);

struct LearnStats {
  bool skipped = false;
  double loss = 0.0;
};

// Online network, target network, replay buffer, and optimizer owned by one learner.
class DqnLearner {
 public:
  DqnLearner(const nn::PolicyConfig& net_cfg, DqnConfig cfg, std::uint64_t seed);

  const nn::PolicyNet<float>& online() const { return online_; }
  nn::PolicyNet<float>& online() { return online_; }
  const nn::PolicyNet<float>& target() const { return target_; }
  ReplayBuffer& buffer() { return buffer_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  const DqnConfig& config() const { return cfg_; }

  // One optimizer step on a uniform batch from the buffer. Skipped (no-op)
  // while the buffer holds fewer than batch_size transitions.
  LearnStats learn_step();

  // One optimizer step on the given batch; returns the mean Huber loss before the step.
  double train_on_batch(const std::vector<const Transition*>& batch);

  // Mean Huber loss of the batch under the current networks, without updating.
  double batch_loss(const std::vector<const Transition*>& batch) const;

  // Records environment steps and copies online -> target when a sync is due.
  void advance(long env_steps);
  void sync_target();

  long env_steps() const { return env_steps_; }
  long last_sync_step() const { return last_sync_; }
  long updates() const { return optimizer_.steps(); }

 private:
  DqnConfig cfg_;
  nn::PolicyNet<float> online_;
  nn::PolicyNet<float> target_;
  nn::Adam<float> optimizer_;
  ReplayBuffer buffer_;
  nn::NetParams<float> grads_;
  std::mt19937_64 rng_;
  long env_steps_ = 0;
  long last_sync_ = 0;
};

}  // namespace fpd::agents
