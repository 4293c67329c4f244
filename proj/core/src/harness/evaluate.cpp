#include "fpd/harness/evaluate.hpp"

#include <chrono>
#include <cmath>
#include <optional>

#include "fpd/agents/action_selection.hpp"
#include "fpd/error.hpp"
#include "json.hpp"

namespace fpd::harness {

std::uint64_t stream_seed(std::uint64_t master, int stream) {
  return master + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(stream + 1);
}

namespace {

struct Stream {
  std::optional<EpisodeState> env;
  StateTensor obs;
  std::mt19937_64 episode_rng;
  std::mt19937_64 action_rng;
  int episode = 0;
  bool finished = false;
};

struct EvalRun {
  EvalReport report;
  std::vector<PlanEntry> first_plan;
};

EvalRun run(const nn::PolicyNet<float>* policy, std::shared_ptr<const Scenario> scenario,
            const std::vector<Beam>& pool, const EvalOptions& opts, bool stop_after_first) {
  if (!scenario) throw ContractError("evaluation needs a scenario");
  if (opts.n_envs < 1 || opts.episodes < 0 || opts.n_beams < 1) {
    throw ConfigError("evaluation needs n_envs >= 1, episodes >= 0, n_beams >= 1");
  }
  if (static_cast<int>(pool.size()) < opts.n_beams) {
    throw InstanceError("evaluation pool holds " + std::to_string(pool.size()) + " beams, " +
                        std::to_string(opts.n_beams) + " requested");
  }
  ActionSpaceKind space = opts.space;
  StateRepr repr{opts.lookahead};
  if (policy) {
    const nn::PolicyConfig& pc = policy->config();
    if (pc.n_fg != scenario->n_fg || pc.n_fs != scenario->n_fs) {
      throw ConfigError("policy grid " + std::to_string(pc.n_fg) + "x" + std::to_string(pc.n_fs) +
                        " does not match scenario grid " + std::to_string(scenario->n_fg) + "x" +
                        std::to_string(scenario->n_fs));
    }
    space = pc.space;
    repr = StateRepr{pc.lookahead};
  }
  EpisodeOptions ep_opts;
  if (space == ActionSpaceKind::Tetris) {
    // Greedy policies can cycle between moves, so evaluation is always capped.
    ep_opts.tetris_move_cap = opts.tetris_move_cap > 0 ? opts.tetris_move_cap
                                                       : default_move_cap(scenario->n_fg, scenario->n_fs);
  }

  EvalRun out;
  EvalReport& rep = out.report;
  rep.n_envs = opts.n_envs;
  rep.episodes = opts.episodes;
  rep.n_beams = opts.n_beams;
  rep.counts.assign(static_cast<std::size_t>(opts.n_envs * opts.episodes), 0);

  const bool recurrent = policy && policy->config().head == nn::HeadKind::Lstm;
  std::optional<nn::LstmState<float>> hidden;
  if (recurrent) hidden = policy->initial_hidden(opts.n_envs);

  std::vector<Stream> streams(static_cast<std::size_t>(opts.n_envs));
  auto start_episode = [&](int i) {
    Stream& s = streams[static_cast<std::size_t>(i)];
    const std::uint64_t ep_seed = s.episode_rng();
    s.env = reset(scenario, sample_episode(pool, opts.n_beams, ep_seed), space, repr,
                  ep_seed ^ 0xd1b54a32d192ed03ULL, ep_opts);
    s.obs = s.env->build_state();
    if (hidden) {
      const int units = policy->config().lstm_units;
      std::fill_n(hidden->h.data() + static_cast<std::size_t>(i) * units, units, 0.0f);
      std::fill_n(hidden->c.data() + static_cast<std::size_t>(i) * units, units, 0.0f);
    }
  };
  for (int i = 0; i < opts.n_envs; ++i) {
    Stream& s = streams[static_cast<std::size_t>(i)];
    const std::uint64_t base = stream_seed(opts.seed, i);
    s.episode_rng.seed(base);
    s.action_rng.seed(base ^ 0x94d049bb133111ebULL);
    if (opts.episodes == 0) {
      s.finished = true;
    } else {
      start_episode(i);
    }
  }

  const auto t0 = std::chrono::steady_clock::now();
  int active = opts.episodes == 0 ? 0 : opts.n_envs;
  std::vector<const StateTensor*> batch(static_cast<std::size_t>(opts.n_envs));
  while (active > 0) {
    nn::Tensor<float> outputs;
    if (policy) {
      for (int i = 0; i < opts.n_envs; ++i) batch[static_cast<std::size_t>(i)] = &streams[static_cast<std::size_t>(i)].obs;
      outputs = policy->act(nn::stack_observations<float>(batch), hidden ? &*hidden : nullptr).outputs;
    }
    for (int i = 0; i < opts.n_envs; ++i) {
      Stream& s = streams[static_cast<std::size_t>(i)];
      if (s.finished) continue;
      Action a;
      if (policy) {
        const int width = outputs.dim(1);
        const std::span<const float> row(outputs.data() + static_cast<std::size_t>(i) * width,
                                         static_cast<std::size_t>(width));
        a = action_from_index(space, agents::argmax(row), scenario->n_fg, scenario->n_fs);
      } else {
        a = agents::random_action(*s.env, s.action_rng);
      }
      const StepResult r = s.env->step(a, RewardKind::Each);
      ++rep.decisions;
      if (!r.done) {
        s.obs = s.env->build_state();
        continue;
      }
      rep.counts[static_cast<std::size_t>(i * opts.episodes + s.episode)] = r.successful;
      if (stop_after_first && i == 0 && s.episode == 0) {
        out.first_plan = s.env->export_plan();
        return out;
      }
      if (++s.episode < opts.episodes) {
        start_episode(i);
      } else {
        s.finished = true;
        --active;
      }
    }
  }
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  rep.ms_per_decision = rep.decisions > 0 ? ms / static_cast<double>(rep.decisions) : 0.0;

  rep.stream_means.assign(static_cast<std::size_t>(opts.n_envs), 0.0);
  double total = 0.0;
  for (int i = 0; i < opts.n_envs; ++i) {
    double sum = 0.0;
    for (int e = 0; e < opts.episodes; ++e) sum += rep.counts[static_cast<std::size_t>(i * opts.episodes + e)];
    rep.stream_means[static_cast<std::size_t>(i)] = opts.episodes > 0 ? sum / opts.episodes : 0.0;
    total += sum;
  }
  if (!rep.counts.empty()) {
    rep.mean = total / static_cast<double>(rep.counts.size());
    double var = 0.0;
    for (int c : rep.counts) var += (c - rep.mean) * (c - rep.mean);
    rep.std = std::sqrt(var / static_cast<double>(rep.counts.size()));
  }
  return out;
}

}  // namespace

EvalReport evaluate(const nn::PolicyNet<float>* policy, std::shared_ptr<const Scenario> scenario,
                    const std::vector<Beam>& pool, const EvalOptions& opts) {
  return run(policy, std::move(scenario), pool, opts, false).report;
}

std::vector<PlanEntry> evaluate_plan(const nn::PolicyNet<float>* policy,
                                     std::shared_ptr<const Scenario> scenario,
                                     const std::vector<Beam>& pool, const EvalOptions& opts) {
  EvalOptions one = opts;
  one.episodes = 1;
  return run(policy, std::move(scenario), pool, one, true).first_plan;
}

std::string report_to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["n_envs"] = r.n_envs;
  j["episodes"] = r.episodes;
  j["n_beams"] = r.n_beams;
  j["mean"] = r.mean;
  j["std"] = r.std;
  j["stream_means"] = r.stream_means;
  j["counts"] = r.counts;
  return j.dump(2) + "\n";
}

}  // namespace fpd::harness
