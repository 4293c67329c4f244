#include "fpd/nn/adam.hpp"

#include <Eigen/Core>
#include <cmath>

namespace fpd::nn {

template <typename T>
Adam<T>::Adam(const NetParams<T>& like, AdamConfig cfg)
    : cfg_(cfg), m_(like.zeros_like()), v_(like.zeros_like()) {
  if (!(cfg_.learning_rate >= 0.0)) throw ConfigError("learning rate must be >= 0");
}

template <typename T>
void Adam<T>::step(NetParams<T>& params, const NetParams<T>& grads) {
  if (grads.count() != params.count() || params.count() != m_.count()) {
    throw ShapeError("optimizer, parameter, and gradient layouts differ");
  }
  if (!grads.all_finite()) throw NumericError("non-finite gradient; update skipped");

  ++t_;
  const double b1 = cfg_.beta1;
  const double b2 = cfg_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const auto step_size = static_cast<T>(cfg_.learning_rate * std::sqrt(c2) / c1);
  const auto eps = static_cast<T>(cfg_.epsilon * std::sqrt(c2));
  const auto tb1 = static_cast<T>(b1);
  const auto tb2 = static_cast<T>(b2);

  for (std::size_t k = 0; k < params.count(); ++k) {
    Tensor<T>& p = params[k];
    const Tensor<T>& g = grads[k];
    require_shape(g.shape(), p.shape(), "gradient");
    const auto n = static_cast<Eigen::Index>(p.size());
    Eigen::Map<Eigen::Array<T, Eigen::Dynamic, 1>> pa(p.data(), n), m(m_[k].data(), n), v(v_[k].data(), n);
    Eigen::Map<const Eigen::Array<T, Eigen::Dynamic, 1>> ga(g.data(), n);
    m = tb1 * m + (T{1} - tb1) * ga;
    v = tb2 * v + (T{1} - tb2) * ga.square();
    pa -= step_size * m / (v.sqrt() + eps);
  }
}

template <typename T>
double global_norm(const NetParams<T>& grads) {
  double sq = 0.0;
  for (const auto& t : grads.tensors) {
    Eigen::Map<const Eigen::Array<T, Eigen::Dynamic, 1>> a(t.data(), static_cast<Eigen::Index>(t.size()));
    sq += a.template cast<double>().square().sum();
  }
  return std::sqrt(sq);
}

template <typename T>
double clip_global_norm(NetParams<T>& grads, double max_norm) {
  const double norm = global_norm(grads);
  if (norm > max_norm && norm > 0.0) {
    const auto scale = static_cast<T>(max_norm / norm);
    for (auto& t : grads.tensors) {
      Eigen::Map<Eigen::Array<T, Eigen::Dynamic, 1>>(t.data(), static_cast<Eigen::Index>(t.size())) *= scale;
    }
  }
  return norm;
}

template class Adam<float>;
template class Adam<double>;
template double global_norm(const NetParams<float>&);
template double global_norm(const NetParams<double>&);
template double clip_global_norm(NetParams<float>&, double);
template double clip_global_norm(NetParams<double>&, double);

}  // namespace fpd::nn
