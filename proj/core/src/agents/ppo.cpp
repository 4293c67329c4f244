#include "fpd/agents/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fpd/nn/layers.hpp"

namespace fpd::agents {

void PpoConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("PPO gamma must lie in (0, 1)");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw ConfigError("GAE lambda must lie in [0, 1]");
  if (!(clip > 0.0 && clip < 1.0)) throw ConfigError("PPO clip must lie in (0, 1)");
  if (epochs < 1 || minibatches < 1 || horizon < 1) {
    throw ConfigError("PPO epochs, minibatches, and horizon must be positive");
  }
  if (value_coef < 0.0 || entropy_coef < 0.0 || !(learning_rate >= 0.0)) {
    throw ConfigError("PPO coefficients and learning rate must be >= 0");
  }
}

void TrajectoryBatch::validate() const {
  const auto n = static_cast<std::size_t>(streams) * static_cast<std::size_t>(horizon);
  if (streams < 1 || horizon < 1) throw ContractError("trajectory needs streams and horizon");
  if (states.size() != n || actions.size() != n || log_probs.size() != n || values.size() != n ||
      rewards.size() != n || dones.size() != n || starts.size() != n) {
    throw ContractError("trajectory sequences must all hold horizon * streams rows");
  }
  if (bootstrap_values.size() != static_cast<std::size_t>(streams)) {
    throw ContractError("trajectory needs one bootstrap value per stream");
  }
}

Advantages gae_advantages(const TrajectoryBatch& traj, double gamma, double lambda) {
  traj.validate();
  const int s_count = traj.streams;
  Advantages out;
  out.advantages.assign(traj.size(), 0.0f);
  out.returns.assign(traj.size(), 0.0f);
  for (int s = 0; s < s_count; ++s) {
    double running = 0.0;
    for (int t = traj.horizon - 1; t >= 0; --t) {
      const auto row = static_cast<std::size_t>(t * s_count + s);
      const double nonterminal = traj.dones[row] ? 0.0 : 1.0;
      const double next_value = t == traj.horizon - 1
                                    ? traj.bootstrap_values[static_cast<std::size_t>(s)]
                                    : traj.values[static_cast<std::size_t>((t + 1) * s_count + s)];
      const double delta = traj.rewards[row] + gamma * next_value * nonterminal - traj.values[row];
      running = delta + gamma * lambda * nonterminal * running;
      out.advantages[row] = static_cast<float>(running);
      out.returns[row] = static_cast<float>(running + traj.values[row]);
    }
  }
  return out;
}

void normalize_advantages(std::vector<float>& adv) {
  if (adv.size() < 2) return;
  double mean = 0.0;
  for (float a : adv) mean += a;
  mean /= static_cast<double>(adv.size());
  double var = 0.0;
  for (float a : adv) var += (a - mean) * (a - mean);
  var /= static_cast<double>(adv.size());
  const double inv = 1.0 / (std::sqrt(var) + 1e-8);
  for (float& a : adv) a = static_cast<float>((a - mean) * inv);
}

PpoLossTerms ppo_loss(const nn::Tensor<float>& logits, const nn::Tensor<float>& values,
                      const std::vector<int>& actions, const std::vector<float>& old_log_probs,
                      const std::vector<float>& advantages, const std::vector<float>& returns,
                      const PpoConfig& cfg) {
  const int m = logits.dim(0);
  const int a_count = logits.dim(1);
  const auto mu = static_cast<std::size_t>(m);
  if (actions.size() != mu || old_log_probs.size() != mu || advantages.size() != mu ||
      returns.size() != mu || values.size() != mu) {
    throw ContractError("PPO minibatch fields disagree in length");
  }
  const nn::Tensor<float> logp = nn::log_softmax(logits);

  PpoLossTerms terms;
  terms.d_logits = nn::Tensor<float>(logits.shape());
  terms.d_values = nn::Tensor<float>({m});
  const double inv_m = 1.0 / m;
  int clipped = 0;
  for (int i = 0; i < m; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    const float* lp = logp.data() + iu * static_cast<std::size_t>(a_count);
    float* dz = terms.d_logits.data() + iu * static_cast<std::size_t>(a_count);
    const int a = actions[iu];
    const double adv = advantages[iu];
    const double ratio = std::exp(static_cast<double>(lp[a]) - old_log_probs[iu]);
    const double clipped_ratio = std::clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip);
    const double unclipped_term = ratio * adv;
    const double clipped_term = clipped_ratio * adv;
    const bool use_clipped = clipped_term < unclipped_term;
    if (use_clipped) ++clipped;
    terms.surrogate += std::min(unclipped_term, clipped_term);
    const double d_ratio = use_clipped ? 0.0 : adv;

    double entropy = 0.0;
    for (int k = 0; k < a_count; ++k) entropy -= std::exp(static_cast<double>(lp[k])) * lp[k];
    terms.entropy += entropy;

    for (int k = 0; k < a_count; ++k) {
      const double p = std::exp(static_cast<double>(lp[k]));
      const double d_logp_a = (k == a ? 1.0 : 0.0) - p;
      const double d_surr = d_ratio * ratio * d_logp_a;
      const double d_ent = -p * (lp[k] + entropy);
      dz[k] = static_cast<float>((-d_surr - cfg.entropy_coef * d_ent) * inv_m);
    }

    const double verr = static_cast<double>(values[iu]) - returns[iu];
    terms.value_loss += verr * verr;
    terms.d_values[iu] = static_cast<float>(2.0 * cfg.value_coef * verr * inv_m);
  }
  terms.surrogate *= inv_m;
  terms.entropy *= inv_m;
  terms.value_loss *= inv_m;
  terms.clip_fraction = clipped * inv_m;
  terms.loss = -terms.surrogate + cfg.value_coef * terms.value_loss - cfg.entropy_coef * terms.entropy;
  if (!std::isfinite(terms.loss)) throw NumericError("PPO loss is not finite");
  return terms;
}

PpoLearner::PpoLearner(const nn::PolicyConfig& net_cfg, PpoConfig cfg, std::uint64_t seed)
    : cfg_(cfg),
      net_(net_cfg, seed),
      optimizer_(net_.params(), nn::AdamConfig{cfg.learning_rate}),
      rng_(seed ^ 0x5851f42d4c957f2dULL) {
  cfg_.validate();
  if (!net_cfg.with_value_head) throw ConfigError("PPO needs a policy with a value head");
}

namespace {

template <typename V>
std::vector<V> gather(const std::vector<V>& src, const std::vector<std::size_t>& rows) {
  std::vector<V> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(src[r]);
  return out;
}

void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(v[i - 1], v[pick(rng)]);
  }
}

}  // namespace

PpoUpdateStats PpoLearner::update(const TrajectoryBatch& traj) {
  traj.validate();
  Advantages adv = gae_advantages(traj, cfg_.gamma, cfg_.gae_lambda);
  normalize_advantages(adv.advantages);

  const bool recurrent = net_.config().head == nn::HeadKind::Lstm;
  PpoUpdateStats stats;
  int batches = 0;

  auto run_minibatch = [&](const std::vector<std::size_t>& rows, const nn::SequenceInput<float>* seq) {
    std::vector<const StateTensor*> states;
    states.reserve(rows.size());
    for (std::size_t r : rows) states.push_back(&traj.states[r]);
    nn::PolicyCache<float> cache;
    const nn::PolicyOutput<float> out =
        net_.forward(nn::stack_observations<float>(states), seq, &cache);
    PpoLossTerms terms = ppo_loss(out.outputs, out.values, gather(traj.actions, rows),
                                  gather(traj.log_probs, rows), gather(adv.advantages, rows),
                                  gather(adv.returns, rows), cfg_);
    net_.backward(cache, terms.d_logits, &terms.d_values, grads_);
    if (cfg_.max_grad_norm > 0.0) nn::clip_global_norm(grads_, cfg_.max_grad_norm);
    optimizer_.step(net_.params(), grads_);

    stats.loss += terms.loss;
    stats.surrogate += terms.surrogate;
    stats.value_loss += terms.value_loss;
    stats.entropy += terms.entropy;
    stats.clip_fraction += terms.clip_fraction;
    if (batches == 0) stats.first_minibatch = std::move(terms);
    ++batches;
  };

  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    if (!recurrent) {
      std::vector<std::size_t> order(traj.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      shuffle(order, rng_);
      const std::size_t parts = std::min<std::size_t>(static_cast<std::size_t>(cfg_.minibatches), order.size());
      const std::size_t per = (order.size() + parts - 1) / parts;
      for (std::size_t b = 0; b < order.size(); b += per) {
        std::vector<std::size_t> rows(order.begin() + static_cast<std::ptrdiff_t>(b),
                                      order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), b + per)));
        run_minibatch(rows, nullptr);
      }
    } else {
      std::vector<std::size_t> streams(static_cast<std::size_t>(traj.streams));
      std::iota(streams.begin(), streams.end(), std::size_t{0});
      shuffle(streams, rng_);
      const std::size_t parts = std::min<std::size_t>(static_cast<std::size_t>(cfg_.minibatches), streams.size());
      const std::size_t per = (streams.size() + parts - 1) / parts;
      for (std::size_t b = 0; b < streams.size(); b += per) {
        const std::vector<std::size_t> group(streams.begin() + static_cast<std::ptrdiff_t>(b),
                                             streams.begin() + static_cast<std::ptrdiff_t>(std::min(streams.size(), b + per)));
        const int g = static_cast<int>(group.size());
        const int units = net_.config().lstm_units;
        nn::SequenceInput<float> seq;
        seq.steps = traj.horizon;
        seq.initial = nn::LstmState<float>::zeros(g, units);
        std::vector<std::size_t> rows;
        for (int t = 0; t < traj.horizon; ++t) {
          for (std::size_t s : group) rows.push_back(static_cast<std::size_t>(t * traj.streams) + s);
        }
        seq.starts = gather(traj.starts, rows);
        if (!traj.initial_hidden.h.empty()) {
          for (int j = 0; j < g; ++j) {
            const auto src = group[static_cast<std::size_t>(j)] * static_cast<std::size_t>(units);
            const auto dst = static_cast<std::size_t>(j) * static_cast<std::size_t>(units);
            std::copy_n(traj.initial_hidden.h.data() + src, units, seq.initial.h.data() + dst);
            std::copy_n(traj.initial_hidden.c.data() + src, units, seq.initial.c.data() + dst);
          }
        }
        run_minibatch(rows, &seq);
      }
    }
  }

  if (batches > 0) {
    stats.loss /= batches;
    stats.surrogate /= batches;
    stats.value_loss /= batches;
    stats.entropy /= batches;
    stats.clip_fraction /= batches;
  }
  stats.optimizer_steps = batches;
  return stats;
}

}  // namespace fpd::agents
