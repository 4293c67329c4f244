#pragma once

#include "fpd/nn/policy.hpp"

namespace fpd::nn {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected adaptive-moment optimizer over a NetParams layout.
template <typename T>
class Adam {
 public:
  Adam(const NetParams<T>& like, AdamConfig cfg);

  // Rejects non-finite gradients with NumericError before touching anything.
  void step(NetParams<T>& params, const NetParams<T>& grads);

  long steps() const { return t_; }
  const AdamConfig& config() const { return cfg_; }
  void set_learning_rate(double lr) { cfg_.learning_rate = lr; }

 private:
  AdamConfig cfg_;
  NetParams<T> m_;
  NetParams<T> v_;
  long t_ = 0;
};

template <typename T>
double global_norm(const NetParams<T>& grads);

// Rescales grads so their global L2 norm is at most max_norm. Returns the pre-clip norm.
template <typename T>
double clip_global_norm(NetParams<T>& grads, double max_norm);

}  // namespace fpd::nn
