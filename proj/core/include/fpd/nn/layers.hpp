#pragma once

#include "fpd/nn/tensor.hpp"

namespace fpd::nn {

// Activations use NHWC layout: [batch, height, width, channels].
//
// conv2d: stride 1, zero "same" padding (odd kernel size), cross-correlation.
//   x       [N, H, W, C]
//   kernels [F, K, K, C]
//   bias    [F]
//   y       [N, H, W, F]
// `cols`, when given, receives the im2col matrix [N*H*W, K*K*C] that
// conv2d_backward can reuse instead of rebuilding it.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& kernels, const Tensor<T>& bias,
                 Tensor<T>* cols = nullptr);

template <typename T>
struct Conv2dGrads {
  Tensor<T> dx;  // left empty unless requested
  Tensor<T> dkernels;
  Tensor<T> dbias;
};

template <typename T>
Conv2dGrads<T> conv2d_backward(const Tensor<T>& x, const Tensor<T>& kernels, const Tensor<T>& dy,
                               const Tensor<T>* cols = nullptr, bool need_dx = true);

// y = x W^T + b with x [N, in], W [out, in], b [out].
template <typename T>
Tensor<T> dense(const Tensor<T>& x, const Tensor<T>& weights, const Tensor<T>& bias);

template <typename T>
struct DenseGrads {
  Tensor<T> dx;
  Tensor<T> dweights;
  Tensor<T> dbias;
};

template <typename T>
DenseGrads<T> dense_backward(const Tensor<T>& x, const Tensor<T>& weights, const Tensor<T>& dy,
                             bool need_dx = true);

template <typename T>
Tensor<T> relu(const Tensor<T>& x);

// dy masked where the forward output was zero.
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& y, const Tensor<T>& dy);

inline constexpr double kLayerNormEps = 1e-5;

// Normalizes each sample (row) to mean 0, variance 1 over all of its
// features, then applies gain/offset. Feature d uses gain[d % G], so with
// NHWC rows a G = C gain is per channel and a G = D gain is per feature.
template <typename T>
struct LayerNormCache {
  Tensor<T> xhat;              // [N, D]
  std::vector<T> inv_std;      // [N]
};

template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gain, const Tensor<T>& offset,
                     LayerNormCache<T>* cache = nullptr);

template <typename T>
struct LayerNormGrads {
  Tensor<T> dx;
  Tensor<T> dgain;
  Tensor<T> doffset;
};

template <typename T>
LayerNormGrads<T> layer_norm_backward(const LayerNormCache<T>& cache, const Tensor<T>& gain,
                                      const Tensor<T>& dy);

// Row-wise softmax / log-softmax of logits [N, A].
template <typename T>
Tensor<T> softmax(const Tensor<T>& logits);
template <typename T>
Tensor<T> log_softmax(const Tensor<T>& logits);

}  // namespace fpd::nn
