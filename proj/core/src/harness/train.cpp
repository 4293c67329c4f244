#include "fpd/harness/train.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

#include "fpd/agents/action_selection.hpp"
#include "fpd/agents/dqn.hpp"
#include "fpd/agents/ppo.hpp"
#include "fpd/error.hpp"
#include "fpd/nn/checkpoint.hpp"

namespace fpd::harness {

std::string metrics_to_csv(const std::vector<MetricsRow>& rows) {
  std::string out = std::string(kMetricsHeader) + "\n";
  char line[256];
  for (const MetricsRow& r : rows) {
    std::snprintf(line, sizeof(line), "%ld,%ld,%.4f,%.6g,%.4f,%ld\n", r.step, r.episodes, r.mean_b,
                  r.loss, r.epsilon, r.wallclock_ms);
    out += line;
  }
  return out;
}

PoolData prepare_pools(std::shared_ptr<const Scenario> scenario, const ExperimentConfig& cfg) {
  if (!scenario) throw ContractError("training needs a scenario");
  PoolData d;
  d.split = split_pool(scenario->beams, cfg.test_fraction, cfg.split_seed);
  d.scenario = std::move(scenario);
  return d;
}

namespace {

struct Env {
  std::optional<EpisodeState> state;
  StateTensor obs;
  bool starting = true;  // the current observation opens an episode
};

// Shared episode bookkeeping and metrics cadence for all agents.
class Runner {
 public:
  Runner(const ExperimentConfig& cfg, const PoolData& pools)
      : cfg_(cfg),
        pools_(pools),
        episode_rng_(cfg.seed),
        action_rng_(cfg.seed ^ 0x94d049bb133111ebULL),
        envs_(static_cast<std::size_t>(cfg.n_envs)),
        t0_(std::chrono::steady_clock::now()) {
    if (static_cast<int>(pools.split.train.size()) < cfg.train_beams) {
      throw InstanceError("train pool holds " + std::to_string(pools.split.train.size()) +
                          " beams, " + std::to_string(cfg.train_beams) + " requested");
    }
    if (cfg.action_space == ActionSpaceKind::Tetris) {
      options_.tetris_move_cap =
          effective_move_cap(cfg.tetris_move_cap, pools.scenario->n_fg, pools.scenario->n_fs);
    }
    for (int i = 0; i < cfg.n_envs; ++i) begin_episode(i);
  }

  Env& env(int i) { return envs_[static_cast<std::size_t>(i)]; }
  std::mt19937_64& action_rng() { return action_rng_; }
  long step() const { return step_; }
  bool finished() const { return step_ >= cfg_.timesteps; }

  std::vector<const StateTensor*> observations() {
    std::vector<const StateTensor*> obs;
    for (auto& e : envs_) obs.push_back(&e.obs);
    return obs;
  }

  // Steps env i. Returns the result; the env already holds its next observation.
  StepResult advance(int i, const Action& a, double epsilon) {
    Env& e = env(i);
    const StepResult r = e.state->step(a, cfg_.reward);
    ++step_;
    if (r.done) {
      window_b_ += r.successful;
      ++window_episodes_;
      ++episodes_;
      begin_episode(i);
    } else {
      e.obs = e.state->build_state();
      e.starting = false;
    }
    if (step_ % kMetricsInterval == 0) emit(epsilon);
    return r;
  }

  void record_loss(double loss) {
    window_loss_ += loss;
    ++window_updates_;
  }

  void finish(double epsilon) {
    if (step_ % kMetricsInterval != 0 && step_ > 0) emit(epsilon);
  }

  TrainResult result() const {
    TrainResult r;
    r.steps = step_;
    r.episodes = episodes_;
    r.metrics = rows_;
    return r;
  }

 private:
  void begin_episode(int i) {
    Env& e = env(i);
    const std::uint64_t seed = episode_rng_();
    e.state = reset(pools_.scenario, sample_episode(pools_.split.train, cfg_.train_beams, seed),
                    cfg_.action_space, cfg_.repr(), seed ^ 0xd1b54a32d192ed03ULL, options_);
    e.obs = e.state->build_state();
    e.starting = true;
  }

  void emit(double epsilon) {
    MetricsRow row;
    row.step = step_;
    row.episodes = episodes_;
    row.mean_b = window_episodes_ > 0 ? window_b_ / static_cast<double>(window_episodes_) : last_mean_b_;
    row.loss = window_updates_ > 0 ? window_loss_ / static_cast<double>(window_updates_) : 0.0;
    row.epsilon = epsilon;
    if (cfg_.record_wallclock) {
      row.wallclock_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - t0_)
                             .count();
    }
    last_mean_b_ = row.mean_b;
    rows_.push_back(row);
    window_b_ = 0.0;
    window_episodes_ = 0;
    window_loss_ = 0.0;
    window_updates_ = 0;
  }

  const ExperimentConfig& cfg_;
  const PoolData& pools_;
  EpisodeOptions options_;
  std::mt19937_64 episode_rng_;
  std::mt19937_64 action_rng_;
  std::vector<Env> envs_;
  std::chrono::steady_clock::time_point t0_;
  long step_ = 0;
  long episodes_ = 0;
  double window_b_ = 0.0;
  long window_episodes_ = 0;
  double window_loss_ = 0.0;
  long window_updates_ = 0;
  double last_mean_b_ = 0.0;
  std::vector<MetricsRow> rows_;
};

nn::PolicyConfig policy_config(const ExperimentConfig& cfg, const Scenario& s) {
  const bool value_head = cfg.agent == AgentKind::Ppo;
  return nn::PolicyConfig::for_env(cfg.action_space, cfg.repr(), s.n_fg, s.n_fs, cfg.head, value_head);
}

void write_outputs(const ExperimentConfig& cfg, const TrainResult& r) {
  if (!cfg.metrics_out.empty()) {
    std::ofstream out(cfg.metrics_out, std::ios::binary);
    if (!out) throw Error("cannot open " + cfg.metrics_out + " for writing");
    out << metrics_to_csv(r.metrics);
  }
  if (!cfg.checkpoint_out.empty() && r.policy) nn::save_checkpoint(*r.policy, cfg.checkpoint_out);
}

TrainResult train_random(const ExperimentConfig& cfg, Runner& run) {
  while (!run.finished()) {
    for (int i = 0; i < cfg.n_envs && !run.finished(); ++i) {
      run.advance(i, agents::random_action(*run.env(i).state, run.action_rng()), 1.0);
    }
  }
  run.finish(1.0);
  return run.result();
}

TrainResult train_dqn(const ExperimentConfig& cfg, const PoolData& pools, Runner& run) {
  const Scenario& s = *pools.scenario;
  agents::DqnLearner learner(policy_config(cfg, s), cfg.dqn_config(), cfg.seed);
  const agents::DqnConfig& dc = learner.config();
  double eps = dc.epsilon.value(0, cfg.timesteps);
  try {
    while (!run.finished()) {
      const nn::PolicyOutput<float> q =
          learner.online().forward(nn::stack_observations<float>(run.observations()));
      const int width = q.outputs.dim(1);
      for (int i = 0; i < cfg.n_envs && !run.finished(); ++i) {
        eps = dc.epsilon.value(run.step(), cfg.timesteps);
        const std::span<const float> row(q.outputs.data() + static_cast<std::size_t>(i) * width,
                                         static_cast<std::size_t>(width));
        const int idx = agents::epsilon_greedy(row, eps, run.action_rng());
        agents::Transition t;
        t.state = run.env(i).obs;
        t.action = idx;
        const StepResult r = run.advance(i, action_from_index(cfg.action_space, idx, s.n_fg, s.n_fs), eps);
        t.reward = static_cast<float>(r.reward);
        t.done = r.done;
        if (!r.done) t.next = run.env(i).obs;
        learner.buffer().push(std::move(t));
        learner.advance(1);
        if (run.step() >= dc.learning_starts && run.step() % dc.train_freq == 0) {
          const agents::LearnStats ls = learner.learn_step();
          if (!ls.skipped) run.record_loss(ls.loss);
        }
      }
    }
  } catch (const NumericError&) {
    TrainResult partial = run.result();
    partial.policy = learner.online();
    write_outputs(cfg, partial);
    throw;
  }
  run.finish(eps);
  TrainResult r = run.result();
  r.policy = learner.online();
  return r;
}

TrainResult train_ppo(const ExperimentConfig& cfg, const PoolData& pools, Runner& run) {
  const Scenario& s = *pools.scenario;
  agents::PpoLearner learner(policy_config(cfg, s), cfg.ppo_config(), cfg.seed);
  const bool recurrent = cfg.head == nn::HeadKind::Lstm;
  const int n = cfg.n_envs;
  std::optional<nn::LstmState<float>> hidden;
  if (recurrent) hidden = learner.net().initial_hidden(n);
  const int units = learner.net().config().lstm_units;

  auto act_all = [&](std::optional<nn::LstmState<float>>* h) {
    return learner.net().act(nn::stack_observations<float>(run.observations()),
                             h && *h ? &**h : nullptr);
  };
  auto clear_row = [&](int i) {
    if (!hidden) return;
    std::fill_n(hidden->h.data() + static_cast<std::size_t>(i) * units, units, 0.0f);
    std::fill_n(hidden->c.data() + static_cast<std::size_t>(i) * units, units, 0.0f);
  };
  auto sample = [&](const nn::Tensor<float>& logits, int i, float* lp) {
    const int width = logits.dim(1);
    const std::span<const float> row(logits.data() + static_cast<std::size_t>(i) * width,
                                     static_cast<std::size_t>(width));
    return agents::sample_categorical(row, run.action_rng(), lp);
  };

  try {
    while (!run.finished()) {
      const long remaining = cfg.timesteps - run.step();
      const int h = static_cast<int>(std::min<long>(cfg.ppo.horizon, remaining / n));
      if (h == 0) {
        // Fewer steps left than environments: spend them without an update.
        const nn::PolicyOutput<float> out = act_all(&hidden);
        for (int i = 0; i < n && !run.finished(); ++i) {
          const int a = sample(out.outputs, i, nullptr);
          run.advance(i, action_from_index(cfg.action_space, a, s.n_fg, s.n_fs), 0.0);
        }
        break;
      }
      agents::TrajectoryBatch traj;
      traj.streams = n;
      traj.horizon = h;
      if (hidden) traj.initial_hidden = *hidden;
      for (int t = 0; t < h; ++t) {
        const nn::PolicyOutput<float> out = act_all(&hidden);
        for (int i = 0; i < n; ++i) {
          float lp = 0.0f;
          const int a = sample(out.outputs, i, &lp);
          traj.states.push_back(run.env(i).obs);
          traj.starts.push_back(run.env(i).starting ? 1 : 0);
          traj.actions.push_back(a);
          traj.log_probs.push_back(lp);
          traj.values.push_back(out.values[static_cast<std::size_t>(i)]);
          const StepResult r = run.advance(i, action_from_index(cfg.action_space, a, s.n_fg, s.n_fs), 0.0);
          traj.rewards.push_back(static_cast<float>(r.reward));
          traj.dones.push_back(r.done ? 1 : 0);
          if (r.done) clear_row(i);
        }
      }
      std::optional<nn::LstmState<float>> peek = hidden;
      const nn::PolicyOutput<float> boot = act_all(&peek);
      traj.bootstrap_values.assign(boot.values.data(), boot.values.data() + n);
      const agents::PpoUpdateStats st = learner.update(traj);
      run.record_loss(st.loss);
    }
  } catch (const NumericError&) {
    TrainResult partial = run.result();
    partial.policy = learner.net();
    write_outputs(cfg, partial);
    throw;
  }
  run.finish(0.0);
  TrainResult r = run.result();
  r.policy = learner.net();
  return r;
}

}  // namespace

TrainResult train(const ExperimentConfig& cfg, const PoolData& pools) {
  cfg.validate();
  Runner run(cfg, pools);
  TrainResult r;
  switch (cfg.agent) {
    case AgentKind::Random: r = train_random(cfg, run); break;
    case AgentKind::Dqn: r = train_dqn(cfg, pools, run); break;
    case AgentKind::Ppo: r = train_ppo(cfg, pools, run); break;
  }
  write_outputs(cfg, r);
  return r;
}

TrainResult train(const ExperimentConfig& cfg) {
  cfg.validate();
  auto scenario = std::make_shared<const Scenario>(load_scenario(cfg.scenario));
  return train(cfg, prepare_pools(std::move(scenario), cfg));
}

}  // namespace fpd::harness
