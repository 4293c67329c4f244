#include "fpd/nn/layers.hpp"

#include <algorithm>
#include <cmath>

namespace fpd::nn {

namespace {

struct ConvDims {
  int n, h, w, c, f, k;
};

template <typename T>
ConvDims conv_dims(const Tensor<T>& x, const Tensor<T>& kernels) {
  if (x.rank() != 4) throw ShapeError("conv2d input must be NHWC, got " + shape_string(x.shape()));
  if (kernels.rank() != 4) {
    throw ShapeError("conv2d kernels must be [F,K,K,C], got " + shape_string(kernels.shape()));
  }
  ConvDims d{x.dim(0), x.dim(1), x.dim(2), x.dim(3), kernels.dim(0), kernels.dim(1)};
  if (kernels.dim(2) != d.k || d.k % 2 == 0) throw ShapeError("conv2d kernels must be square and odd");
  if (kernels.dim(3) != d.c) {
    throw ShapeError("conv2d channel mismatch: input " + shape_string(x.shape()) + ", kernels " +
                     shape_string(kernels.shape()));
  }
  return d;
}

// Row (n, y, x) of the result holds the K*K*C receptive field, ordered (ky, kx, c).
template <typename T>
Tensor<T> im2col(const Tensor<T>& x, const ConvDims& d) {
  const int pad = d.k / 2;
  const int row_len = d.k * d.k * d.c;
  Tensor<T> cols({d.n * d.h * d.w, row_len});
  T* out = cols.data();
  const T* in = x.data();
  for (int n = 0; n < d.n; ++n) {
    for (int y = 0; y < d.h; ++y) {
      for (int xx = 0; xx < d.w; ++xx) {
        T* row = out + (static_cast<std::size_t>((n * d.h + y) * d.w + xx)) * row_len;
        for (int ky = 0; ky < d.k; ++ky) {
          const int iy = y + ky - pad;
          for (int kx = 0; kx < d.k; ++kx) {
            const int ix = xx + kx - pad;
            T* dst = row + (ky * d.k + kx) * d.c;
            if (iy < 0 || iy >= d.h || ix < 0 || ix >= d.w) {
              std::fill(dst, dst + d.c, T{0});
            } else {
              const T* src = in + (static_cast<std::size_t>((n * d.h + iy) * d.w + ix)) * d.c;
              std::copy(src, src + d.c, dst);
            }
          }
        }
      }
    }
  }
  return cols;
}

template <typename T>
Tensor<T> col2im(const Tensor<T>& dcols, const ConvDims& d) {
  const int pad = d.k / 2;
  const int row_len = d.k * d.k * d.c;
  Tensor<T> dx({d.n, d.h, d.w, d.c});
  T* out = dx.data();
  const T* in = dcols.data();
  for (int n = 0; n < d.n; ++n) {
    for (int y = 0; y < d.h; ++y) {
      for (int xx = 0; xx < d.w; ++xx) {
        const T* row = in + (static_cast<std::size_t>((n * d.h + y) * d.w + xx)) * row_len;
        for (int ky = 0; ky < d.k; ++ky) {
          const int iy = y + ky - pad;
          if (iy < 0 || iy >= d.h) continue;
          for (int kx = 0; kx < d.k; ++kx) {
            const int ix = xx + kx - pad;
            if (ix < 0 || ix >= d.w) continue;
            const T* src = row + (ky * d.k + kx) * d.c;
            T* dst = out + (static_cast<std::size_t>((n * d.h + iy) * d.w + ix)) * d.c;
            for (int c = 0; c < d.c; ++c) dst[c] += src[c];
          }
        }
      }
    }
  }
  return dx;
}

}  // namespace

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& kernels, const Tensor<T>& bias, Tensor<T>* cols) {
  const ConvDims d = conv_dims(x, kernels);
  require_shape(bias.shape(), {d.f}, "conv2d bias");

  Tensor<T> local;
  Tensor<T>& c = cols ? *cols : local;
  c = im2col(x, d);

  Tensor<T> y({d.n, d.h, d.w, d.f});
  MatrixMap<T> ym(y.data(), static_cast<Eigen::Index>(d.n) * d.h * d.w, d.f);
  ConstMatrixMap<T> km(kernels.data(), d.f, static_cast<Eigen::Index>(d.k) * d.k * d.c);
  ym.noalias() = c.matrix() * km.transpose();
  ym.rowwise() += ConstVectorMap<T>(bias.data(), d.f);
  return y;
}

template <typename T>
Conv2dGrads<T> conv2d_backward(const Tensor<T>& x, const Tensor<T>& kernels, const Tensor<T>& dy,
                               const Tensor<T>* cols, bool need_dx) {
  const ConvDims d = conv_dims(x, kernels);
  require_shape(dy.shape(), {d.n, d.h, d.w, d.f}, "conv2d output gradient");

  Tensor<T> local;
  if (!cols) local = im2col(x, d);
  const Tensor<T>& c = cols ? *cols : local;
  const auto rows = static_cast<Eigen::Index>(d.n) * d.h * d.w;
  const auto row_len = static_cast<Eigen::Index>(d.k) * d.k * d.c;

  ConstMatrixMap<T> dym(dy.data(), rows, d.f);
  ConstMatrixMap<T> km(kernels.data(), d.f, row_len);

  Conv2dGrads<T> g;
  g.dkernels = Tensor<T>(kernels.shape());
  MatrixMap<T>(g.dkernels.data(), d.f, row_len).noalias() = dym.transpose() * c.matrix();
  g.dbias = Tensor<T>({d.f});
  VectorMap<T>(g.dbias.data(), d.f) = dym.colwise().sum();
  if (need_dx) {
    Tensor<T> dcols({static_cast<int>(rows), static_cast<int>(row_len)});
    dcols.matrix().noalias() = dym * km;
    g.dx = col2im(dcols, d);
  }
  return g;
}

template <typename T>
Tensor<T> dense(const Tensor<T>& x, const Tensor<T>& weights, const Tensor<T>& bias) {
  if (x.rank() != 2 || weights.rank() != 2) throw ShapeError("dense expects rank-2 input and weights");
  const int out = weights.dim(0);
  require_shape({x.dim(1)}, {weights.dim(1)}, "dense input features");
  require_shape(bias.shape(), {out}, "dense bias");
  Tensor<T> y({x.dim(0), out});
  y.matrix().noalias() = x.matrix() * weights.matrix().transpose();
  y.matrix().rowwise() += ConstVectorMap<T>(bias.data(), out);
  return y;
}

template <typename T>
DenseGrads<T> dense_backward(const Tensor<T>& x, const Tensor<T>& weights, const Tensor<T>& dy,
                             bool need_dx) {
  require_shape(dy.shape(), {x.dim(0), weights.dim(0)}, "dense output gradient");
  DenseGrads<T> g;
  g.dweights = Tensor<T>(weights.shape());
  g.dweights.matrix().noalias() = dy.matrix().transpose() * x.matrix();
  g.dbias = Tensor<T>({weights.dim(0)});
  VectorMap<T>(g.dbias.data(), weights.dim(0)) = dy.matrix().colwise().sum();
  if (need_dx) {
    g.dx = Tensor<T>(x.shape());
    g.dx.matrix().noalias() = dy.matrix() * weights.matrix();
  }
  return g;
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  Tensor<T> y = x;
  for (T& v : y.values()) v = v > T{0} ? v : T{0};
  return y;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& y, const Tensor<T>& dy) {
  require_shape(dy.shape(), y.shape(), "relu gradient");
  Tensor<T> dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    if (!(y[i] > T{0})) dx[i] = T{0};
  }
  return dx;
}

template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gain, const Tensor<T>& offset,
                     LayerNormCache<T>* cache) {
  if (x.rank() < 2) throw ShapeError("layer_norm expects a batch dimension");
  const int n = x.dim(0);
  const auto dsize = n == 0 ? std::size_t{0} : x.size() / static_cast<std::size_t>(n);
  const auto g = gain.size();
  if (g == 0 || dsize % g != 0 || offset.size() != g) {
    throw ShapeError("layer_norm gain/offset " + shape_string(gain.shape()) + " incompatible with " +
                     shape_string(x.shape()));
  }
  Tensor<T> y(x.shape());
  if (cache) {
    cache->xhat = Tensor<T>(x.shape());
    cache->inv_std.assign(static_cast<std::size_t>(n), T{0});
  }
  for (int s = 0; s < n; ++s) {
    const T* row = x.data() + static_cast<std::size_t>(s) * dsize;
    double mean = 0.0;
    for (std::size_t d = 0; d < dsize; ++d) mean += row[d];
    mean /= static_cast<double>(dsize);
    double var = 0.0;
    for (std::size_t d = 0; d < dsize; ++d) {
      const double c = row[d] - mean;
      var += c * c;
    }
    var /= static_cast<double>(dsize);
    const auto inv_std = static_cast<T>(1.0 / std::sqrt(var + kLayerNormEps));
    T* out = y.data() + static_cast<std::size_t>(s) * dsize;
    T* xh = cache ? cache->xhat.data() + static_cast<std::size_t>(s) * dsize : nullptr;
    const auto m = static_cast<T>(mean);
    for (std::size_t d = 0; d < dsize; ++d) {
      const T h = (row[d] - m) * inv_std;
      if (xh) xh[d] = h;
      out[d] = h * gain[d % g] + offset[d % g];
    }
    if (cache) cache->inv_std[static_cast<std::size_t>(s)] = inv_std;
  }
  return y;
}

template <typename T>
LayerNormGrads<T> layer_norm_backward(const LayerNormCache<T>& cache, const Tensor<T>& gain,
                                      const Tensor<T>& dy) {
  require_shape(dy.shape(), cache.xhat.shape(), "layer_norm gradient");
  const int n = dy.dim(0);
  const auto dsize = n == 0 ? std::size_t{0} : dy.size() / static_cast<std::size_t>(n);
  const auto g = gain.size();

  LayerNormGrads<T> out;
  out.dx = Tensor<T>(dy.shape());
  out.dgain = Tensor<T>(gain.shape());
  out.doffset = Tensor<T>(gain.shape());
  std::vector<T> dxhat(dsize);
  for (int s = 0; s < n; ++s) {
    const std::size_t base = static_cast<std::size_t>(s) * dsize;
    const T* dyr = dy.data() + base;
    const T* xh = cache.xhat.data() + base;
    double mean_dxhat = 0.0;
    double mean_dxhat_xhat = 0.0;
    for (std::size_t d = 0; d < dsize; ++d) {
      out.dgain[d % g] += dyr[d] * xh[d];
      out.doffset[d % g] += dyr[d];
      dxhat[d] = dyr[d] * gain[d % g];
      mean_dxhat += dxhat[d];
      mean_dxhat_xhat += dxhat[d] * xh[d];
    }
    mean_dxhat /= static_cast<double>(dsize);
    mean_dxhat_xhat /= static_cast<double>(dsize);
    const T inv_std = cache.inv_std[static_cast<std::size_t>(s)];
    T* dx = out.dx.data() + base;
    for (std::size_t d = 0; d < dsize; ++d) {
      dx[d] = inv_std * (dxhat[d] - static_cast<T>(mean_dxhat) - xh[d] * static_cast<T>(mean_dxhat_xhat));
    }
  }
  return out;
}

template <typename T>
Tensor<T> log_softmax(const Tensor<T>& logits) {
  if (logits.rank() != 2) throw ShapeError("softmax expects [N, A] logits");
  Tensor<T> out(logits.shape());
  const int n = logits.dim(0);
  const int a = logits.dim(1);
  for (int i = 0; i < n; ++i) {
    const T* row = logits.data() + static_cast<std::size_t>(i) * a;
    const T mx = *std::max_element(row, row + a);
    double sum = 0.0;
    for (int j = 0; j < a; ++j) sum += std::exp(static_cast<double>(row[j] - mx));
    const auto lse = static_cast<T>(std::log(sum)) + mx;
    T* dst = out.data() + static_cast<std::size_t>(i) * a;
    for (int j = 0; j < a; ++j) dst[j] = row[j] - lse;
  }
  return out;
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& logits) {
  Tensor<T> out = log_softmax(logits);
  for (T& v : out.values()) v = std::exp(v);
  return out;
}

#define FPD_INSTANTIATE_LAYERS(T)                                                                  \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Tensor<T>*);     \
  template Conv2dGrads<T> conv2d_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,    \
                                          const Tensor<T>*, bool);                                 \
  template Tensor<T> dense(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                  \
  template DenseGrads<T> dense_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, bool); \
  template Tensor<T> relu(const Tensor<T>&);                                                       \
  template Tensor<T> relu_backward(const Tensor<T>&, const Tensor<T>&);                            \
  template Tensor<T> layer_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,              \
                                LayerNormCache<T>*);                                               \
  template LayerNormGrads<T> layer_norm_backward(const LayerNormCache<T>&, const Tensor<T>&,       \
                                                 const Tensor<T>&);                                \
  template Tensor<T> softmax(const Tensor<T>&);                                                    \
  template Tensor<T> log_softmax(const Tensor<T>&);

FPD_INSTANTIATE_LAYERS(float)
FPD_INSTANTIATE_LAYERS(double)

#undef FPD_INSTANTIATE_LAYERS

}  // namespace fpd::nn
