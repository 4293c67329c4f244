#include <algorithm>
#include <cmath>

#include "fpd/agents/action_selection.hpp"
#include "fpd/error.hpp"

namespace fpd::agents {

int random_action_index(ActionSpaceKind space, int n_fg, int n_fs, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, action_count(space, n_fg, n_fs) - 1);
  return pick(rng);
}

Action random_action(const EpisodeState& st, std::mt19937_64& rng) {
  if (st.done()) throw StateError("no action on a finished episode");
  const int idx = random_action_index(st.space(), st.n_fg(), st.n_fs(), rng);
  return action_from_index(st.space(), idx, st.n_fg(), st.n_fs());
}

int argmax(std::span<const float> values) {
  if (values.empty()) throw ContractError("argmax of an empty vector");
  return static_cast<int>(std::max_element(values.begin(), values.end()) - values.begin());
}

int epsilon_greedy(std::span<const float> q_values, double epsilon, std::mt19937_64& rng) {
  if (q_values.empty()) throw ContractError("epsilon_greedy needs at least one Q-value");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ContractError("epsilon must lie in [0, 1]");
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < epsilon) {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(q_values.size()) - 1);
    return pick(rng);
  }
  return argmax(q_values);
}

int sample_categorical(std::span<const float> logits, std::mt19937_64& rng, float* log_prob) {
  if (logits.empty()) throw ContractError("cannot sample from an empty distribution");
  const float mx = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (float z : logits) total += std::exp(static_cast<double>(z - mx));
  std::uniform_real_distribution<double> unit(0.0, total);
  const double u = unit(rng);
  double acc = 0.0;
  std::size_t chosen = logits.size() - 1;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    acc += std::exp(static_cast<double>(logits[i] - mx));
    if (u < acc) {
      chosen = i;
      break;
    }
  }
  if (log_prob) {
    *log_prob = static_cast<float>(static_cast<double>(logits[chosen] - mx) - std::log(total));
  }
  return static_cast<int>(chosen);
}

double EpsilonSchedule::value(long step, long total_steps) const {
  const double horizon = fraction * static_cast<double>(total_steps);
  if (horizon <= 0.0) return end;
  const double progress = std::clamp(static_cast<double>(step) / horizon, 0.0, 1.0);
  return start + (end - start) * progress;
}

}  // namespace fpd::agents
