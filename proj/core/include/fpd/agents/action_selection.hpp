#pragma once

#include <random>
#include <span>

#include "fpd/environment.hpp"

namespace fpd::agents {

// Uniform over the episode's action set.
Action random_action(const EpisodeState& st, std::mt19937_64& rng);
int random_action_index(ActionSpaceKind space, int n_fg, int n_fs, std::mt19937_64& rng);

// Lowest index wins ties.
int argmax(std::span<const float> values);

// Argmax with probability 1 - epsilon, otherwise a uniform index.
int epsilon_greedy(std::span<const float> q_values, double epsilon, std::mt19937_64& rng);

// Draws from softmax(logits); writes the chosen action's log-probability.
int sample_categorical(std::span<const float> logits, std::mt19937_64& rng, float* log_prob = nullptr);

// Linear decay from start to end over the first `fraction` of training, then flat.
struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.05;
  double fraction = 0.2;

  double value(long step, long total_steps) const;
};

}  // namespace fpd::agents
