#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "fpd/nn/adam.hpp"
#include "fpd/nn/policy.hpp"

namespace fpd::agents {

struct PpoConfig {
  double gamma = 0.1;
  double gae_lambda = 0.95;
  double clip = 0.2;
  int epochs = 4;
  int minibatches = 4;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  int horizon = 128;  // rollout steps per environment
  double learning_rate = 3e-4;
  double max_grad_norm = 0.0;  // <= 0 disables gradient-norm clipping

  void validate() const;
};

// Rollout of `horizon` steps from each of `streams` environments, time-major:
// row t * streams + n.
struct TrajectoryBatch {
  int streams = 0;
  int horizon = 0;
  std::vector<StateTensor> states;
  std::vector<int> actions;
  std::vector<float> log_probs;
  std::vector<float> values;
  std::vector<float> rewards;
  std::vector<std::uint8_t> dones;   // episode ended with this step
  std::vector<std::uint8_t> starts;  // episode began at this step (LSTM reset)
  std::vector<float> bootstrap_values;  // V(s_horizon) per stream
  nn::LstmState<float> initial_hidden;  // recurrent state before row 0

  std::size_t size() const { return actions.size(); }
  void validate() const;
};

struct Advantages {
  std::vector<float> advantages;
  std::vector<float> returns;  // advantages + values
};

// Generalized advantage estimation by reverse recursion.
Advantages gae_advantages(const TrajectoryBatch& traj, double gamma, double lambda);

// In-place standardization to mean 0, std 1 (no-op for fewer than two samples).
void normalize_advantages(std::vector<float>& adv);

struct PpoLossTerms {
  double surrogate = 0.0;   // mean clipped surrogate (to maximize)
  double value_loss = 0.0;  // mean squared error
  double entropy = 0.0;     // mean policy entropy
  double loss = 0.0;        // -surrogate + c_v * value_loss - c_e * entropy
  double clip_fraction = 0.0;
  nn::Tensor<float> d_logits;
  nn::Tensor<float> d_values;
};

// Loss and its gradients w.r.t. logits [M, A] and values [M].
PpoLossTerms ppo_loss(const nn::Tensor<float>& logits, const nn::Tensor<float>& values,
                      const std::vector<int>& actions, const std::vector<float>& old_log_probs,
                      const std::vector<float>& advantages, const std::vector<float>& returns,
                      const PpoConfig& cfg);

struct PpoUpdateStats {
  double loss = 0.0;
  double surrogate = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  PpoLossTerms first_minibatch;  // terms of the very first minibatch, before any step
  int optimizer_steps = 0;
};

class PpoLearner {
 public:
  PpoLearner(const nn::PolicyConfig& net_cfg, PpoConfig cfg, std::uint64_t seed);

  const nn::PolicyNet<float>& net() const { return net_; }
  nn::PolicyNet<float>& net() { return net_; }
  const PpoConfig& config() const { return cfg_; }

  // cfg.epochs passes over shuffled minibatches. MLP heads shuffle rows;
  // LSTM heads shuffle whole streams so each minibatch keeps its sequences.
  PpoUpdateStats update(const TrajectoryBatch& traj);

 private:
  PpoConfig cfg_;
  nn::PolicyNet<float> net_;
  nn::Adam<float> optimizer_;
  nn::NetParams<float> grads_;
  std::mt19937_64 rng_;
};

}  // namespace fpd::agents
