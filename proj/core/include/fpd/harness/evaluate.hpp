#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "fpd/environment.hpp"
#include "fpd/nn/policy.hpp"

namespace fpd::harness {

struct EvalOptions {
  int n_beams = 100;
  int episodes = 1;  // per stream
  int n_envs = 8;
  std::uint64_t seed = 1;
  int tetris_move_cap = 0;  // <= 0 selects default_move_cap; evaluation is always capped
  // Used only for the random policy; a network brings its own layout.
  ActionSpaceKind space = ActionSpaceKind::Grid;
  bool lookahead = false;
};

struct EvalReport {
  int n_envs = 0;
  int episodes = 0;  // per stream
  int n_beams = 0;
  std::vector<int> counts;           // stream-major: counts[i * episodes + e]
  std::vector<double> stream_means;  // one per stream
  double mean = 0.0;
  double std = 0.0;                  // population std over all counts
  double ms_per_decision = 0.0;
  long decisions = 0;
};

// Seed of stream i; fixed offsets from the master seed.
std::uint64_t stream_seed(std::uint64_t master, int stream);

// Greedy evaluation: argmax of Q-values or logits, or uniform actions when
// `policy` is null. All streams advance in lockstep so every decision is a
// single batched forward pass.
EvalReport evaluate(const nn::PolicyNet<float>* policy, std::shared_ptr<const Scenario> scenario,
                    const std::vector<Beam>& pool, const EvalOptions& opts);

// Deterministic text form (no timing): counts and summary statistics.
std::string report_to_json(const EvalReport& r);

// Plan of the first episode of stream 0 under the same protocol.
std::vector<PlanEntry> evaluate_plan(const nn::PolicyNet<float>* policy,
                                     std::shared_ptr<const Scenario> scenario,
                                     const std::vector<Beam>& pool, const EvalOptions& opts);

}  // namespace fpd::harness
