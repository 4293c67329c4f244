#include "fpd/agents/dqn.hpp"

#include <algorithm>
#include <cmath>

namespace fpd::agents {

void DqnConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("DQN gamma must lie in (0, 1)");
  if (!(learning_rate >= 0.0)) throw ConfigError("DQN learning rate must be >= 0");
  if (batch_size < 1 || buffer_capacity < 1 || target_sync < 1 || train_freq < 1) {
    throw ConfigError("DQN batch size, buffer capacity, target sync, and train freq must be positive");
  }
  if (learning_starts < 0) throw ConfigError("DQN learning_starts must be >= 0");
  if (!(epsilon.start >= epsilon.end) || epsilon.end < 0.0 || epsilon.start > 1.0) {
    throw ConfigError("epsilon schedule must be non-increasing within [0, 1]");
  }
}

namespace {

nn::Tensor<float> stack(const std::vector<const StateTensor*>& states) {
  return nn::stack_observations<float>(states);
}

double huber(double x, double delta) {
  const double a = std::abs(x);
  return a <= delta ? 0.5 * x * x : delta * (a - 0.5 * delta);
}

double huber_grad(double x, double delta) { return std::clamp(x, -delta, delta); }

}  // namespace

std::vector<float> td_target(const std::vector<const Transition*>& batch,
                             const nn::PolicyNet<float>& target, double gamma) {
  std::vector<float> y(batch.size());
  std::vector<const StateTensor*> next;
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    y[i] = batch[i]->reward;
    if (!batch[i]->done && batch[i]->next) {
      next.push_back(&*batch[i]->next);
      rows.push_back(i);
    }
  }
  if (next.empty() || gamma == 0.0) return y;
  const nn::PolicyOutput<float> out = target.forward(stack(next));
  const int actions = out.outputs.dim(1);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const float* q = out.outputs.data() + r * static_cast<std::size_t>(actions);
    const float best = *std::max_element(q, q + actions);
    y[rows[r]] = static_cast<float>(batch[rows[r]]->reward + gamma * best);
  }
  return y;
}

DqnLearner::DqnLearner(const nn::PolicyConfig& net_cfg, DqnConfig cfg, std::uint64_t seed)
    : cfg_(cfg),
      online_(net_cfg, seed),
      target_(online_),
      optimizer_(online_.params(), nn::AdamConfig{cfg.learning_rate}),
      buffer_(static_cast<std::size_t>(cfg.buffer_capacity)),
      rng_(seed ^ 0x9e3779b97f4a7c15ULL) {
  cfg_.validate();
  if (net_cfg.head != nn::HeadKind::Mlp) throw ConfigError("DQN supports only the MLP head");
}

double DqnLearner::batch_loss(const std::vector<const Transition*>& batch) const {
  const std::vector<float> y = td_target(batch, target_, cfg_.gamma);
  std::vector<const StateTensor*> states;
  for (const Transition* t : batch) states.push_back(&t->state);
  const nn::PolicyOutput<float> out = online_.forward(stack(states));
  const int actions = out.outputs.dim(1);
  double loss = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double q = out.outputs[i * static_cast<std::size_t>(actions) + batch[i]->action];
    loss += huber(q - y[i], cfg_.huber_delta);
  }
  return loss / static_cast<double>(batch.size());
}

double DqnLearner::train_on_batch(const std::vector<const Transition*>& batch) {
  if (batch.empty()) throw ContractError("empty DQN batch");
  const std::vector<float> y = td_target(batch, target_, cfg_.gamma);
  std::vector<const StateTensor*> states;
  for (const Transition* t : batch) states.push_back(&t->state);

  nn::PolicyCache<float> cache;
  const nn::PolicyOutput<float> out = online_.forward(stack(states), nullptr, &cache);
  const int actions = out.outputs.dim(1);
  nn::Tensor<float> d_out(out.outputs.shape());
  double loss = 0.0;
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const std::size_t k = i * static_cast<std::size_t>(actions) + static_cast<std::size_t>(batch[i]->action);
    const double diff = out.outputs[k] - y[i];
    loss += huber(diff, cfg_.huber_delta);
    d_out[k] = static_cast<float>(huber_grad(diff, cfg_.huber_delta) * inv_n);
  }
  loss *= inv_n;
  if (!std::isfinite(loss)) throw NumericError("DQN loss is not finite");

  online_.backward(cache, d_out, nullptr, grads_);
  if (cfg_.max_grad_norm > 0.0) nn::clip_global_norm(grads_, cfg_.max_grad_norm);
  optimizer_.step(online_.params(), grads_);
  return loss;
}

LearnStats DqnLearner::learn_step() {
  if (buffer_.size() < static_cast<std::size_t>(cfg_.batch_size)) return {true, 0.0};
  const auto batch = buffer_.sample(static_cast<std::size_t>(cfg_.batch_size), rng_);
  return {false, train_on_batch(batch)};
}

void DqnLearner::advance(long env_steps) {
  env_steps_ += env_steps;
  if (env_steps_ - last_sync_ >= cfg_.target_sync) sync_target();
}

void DqnLearner::sync_target() {
  target_.params() = online_.params();
  last_sync_ = env_steps_;
}

}  // namespace fpd::agents
