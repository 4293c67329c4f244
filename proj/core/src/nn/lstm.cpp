#include "fpd/nn/lstm.hpp"

#include <cmath>

namespace fpd::nn {

namespace {

template <typename T>
T sigmoid(T v) {
  return T{1} / (T{1} + std::exp(-v));
}

template <typename T>
int check_weights(const LstmWeights<T>& w, int in) {
  if (w.wh.rank() != 2 || w.wh.dim(0) != 4 * w.wh.dim(1)) {
    throw ShapeError("lstm recurrent weights must be [4H, H], got " + shape_string(w.wh.shape()));
  }
  const int units = w.wh.dim(1);
  require_shape(w.wx.shape(), {4 * units, in}, "lstm input weights");
  require_shape(w.b.shape(), {4 * units}, "lstm bias");
  return units;
}

// Activates pre-gates in place and advances (h, c) for one step.
template <typename T>
void cell_update(Tensor<T>& gates, const Tensor<T>& c_prev, Tensor<T>& h, Tensor<T>& c,
                 Tensor<T>* tanh_c, int units) {
  const int n = gates.dim(0);
  for (int s = 0; s < n; ++s) {
    T* gr = gates.data() + static_cast<std::size_t>(s) * 4 * units;
    const T* cp = c_prev.data() + static_cast<std::size_t>(s) * units;
    T* hr = h.data() + static_cast<std::size_t>(s) * units;
    T* cr = c.data() + static_cast<std::size_t>(s) * units;
    for (int u = 0; u < units; ++u) {
      const T i = sigmoid(gr[u]);
      const T f = sigmoid(gr[units + u]);
      const T g = std::tanh(gr[2 * units + u]);
      const T o = sigmoid(gr[3 * units + u]);
      gr[u] = i;
      gr[units + u] = f;
      gr[2 * units + u] = g;
      gr[3 * units + u] = o;
      cr[u] = f * cp[u] + i * g;
      const T tc = std::tanh(cr[u]);
      if (tanh_c) (*tanh_c)[static_cast<std::size_t>(s) * units + u] = tc;
      hr[u] = o * tc;
    }
  }
}

}  // namespace

template <typename T>
LstmState<T> lstm_step(const Tensor<T>& x, const LstmState<T>& state, const LstmWeights<T>& w) {
  if (x.rank() != 2) throw ShapeError("lstm input must be [N, in]");
  const int units = check_weights(w, x.dim(1));
  const int n = x.dim(0);
  require_shape(state.h.shape(), {n, units}, "lstm hidden state");
  require_shape(state.c.shape(), {n, units}, "lstm cell state");

  Tensor<T> gates({n, 4 * units});
  gates.matrix().noalias() = x.matrix() * w.wx.matrix().transpose();
  gates.matrix().noalias() += state.h.matrix() * w.wh.matrix().transpose();
  gates.matrix().rowwise() += ConstVectorMap<T>(w.b.data(), 4 * units);

  LstmState<T> next = LstmState<T>::zeros(n, units);
  cell_update(gates, state.c, next.h, next.c, static_cast<Tensor<T>*>(nullptr), units);
  return next;
}

template <typename T>
Tensor<T> lstm_sequence(const Tensor<T>& xs, int steps, const LstmState<T>& initial,
                        const std::vector<std::uint8_t>& starts, const LstmWeights<T>& w,
                        LstmSequenceCache<T>* cache, LstmState<T>* final_state) {
  if (xs.rank() != 2 || steps <= 0 || xs.dim(0) % steps != 0) {
    throw ShapeError("lstm sequence input " + shape_string(xs.shape()) + " does not split into " +
                     std::to_string(steps) + " steps");
  }
  const int streams = xs.dim(0) / steps;
  const int units = check_weights(w, xs.dim(1));
  require_shape(initial.h.shape(), {streams, units}, "lstm initial hidden state");
  require_shape(initial.c.shape(), {streams, units}, "lstm initial cell state");
  if (starts.size() != static_cast<std::size_t>(xs.dim(0))) {
    throw ShapeError("lstm episode-start flags must have one entry per row");
  }

  // Input contribution for every step in one product.
  Tensor<T> xw({xs.dim(0), 4 * units});
  xw.matrix().noalias() = xs.matrix() * w.wx.matrix().transpose();

  if (cache) {
    *cache = {};
    cache->steps = steps;
    cache->streams = streams;
    cache->starts = starts;
  }

  Tensor<T> hs({xs.dim(0), units});
  LstmState<T> cur = initial;
  const std::size_t row = static_cast<std::size_t>(4 * units);
  for (int t = 0; t < steps; ++t) {
    for (int s = 0; s < streams; ++s) {
      if (starts[static_cast<std::size_t>(t * streams + s)]) {
        std::fill_n(cur.h.data() + static_cast<std::size_t>(s) * units, units, T{0});
        std::fill_n(cur.c.data() + static_cast<std::size_t>(s) * units, units, T{0});
      }
    }
    Tensor<T> gates({streams, 4 * units});
    std::copy_n(xw.data() + static_cast<std::size_t>(t) * streams * row, streams * row, gates.data());
    gates.matrix().noalias() += cur.h.matrix() * w.wh.matrix().transpose();
    gates.matrix().rowwise() += ConstVectorMap<T>(w.b.data(), 4 * units);

    LstmState<T> next = LstmState<T>::zeros(streams, units);
    Tensor<T> tanh_c({streams, units});
    cell_update(gates, cur.c, next.h, next.c, &tanh_c, units);
    std::copy_n(next.h.data(), next.h.size(), hs.data() + static_cast<std::size_t>(t) * streams * units);
    if (cache) {
      cache->gates.push_back(std::move(gates));
      cache->h_prev.push_back(std::move(cur.h));
      cache->c_prev.push_back(std::move(cur.c));
      cache->tanh_c.push_back(std::move(tanh_c));
    }
    cur = std::move(next);
  }
  if (final_state) *final_state = std::move(cur);
  return hs;
}

template <typename T>
LstmGrads<T> lstm_sequence_backward(const LstmSequenceCache<T>& cache, const Tensor<T>& xs,
                                    const Tensor<T>& dhs, const LstmWeights<T>& w, bool need_dx) {
  const int steps = cache.steps;
  const int streams = cache.streams;
  const int units = check_weights(w, xs.dim(1));
  require_shape(dhs.shape(), {steps * streams, units}, "lstm output gradient");

  LstmGrads<T> g;
  g.dwh = Tensor<T>(w.wh.shape());
  g.db = Tensor<T>(w.b.shape());
  Tensor<T> da({steps * streams, 4 * units});

  Tensor<T> dh_next({streams, units});
  Tensor<T> dc_next({streams, units});
  for (int t = steps - 1; t >= 0; --t) {
    const Tensor<T>& gates = cache.gates[static_cast<std::size_t>(t)];
    const Tensor<T>& c_prev = cache.c_prev[static_cast<std::size_t>(t)];
    const Tensor<T>& tanh_c = cache.tanh_c[static_cast<std::size_t>(t)];
    T* da_t = da.data() + static_cast<std::size_t>(t) * streams * 4 * units;
    Tensor<T> dc_prev({streams, units});
    for (int s = 0; s < streams; ++s) {
      const std::size_t hb = static_cast<std::size_t>(s) * units;
      const std::size_t gb = static_cast<std::size_t>(s) * 4 * units;
      const T* dh_out = dhs.data() + (static_cast<std::size_t>(t) * streams + s) * units;
      for (int u = 0; u < units; ++u) {
        const T i = gates[gb + u];
        const T f = gates[gb + units + u];
        const T gg = gates[gb + 2 * units + u];
        const T o = gates[gb + 3 * units + u];
        const T tc = tanh_c[hb + u];
        const T dh = dh_out[u] + dh_next[hb + u];
        const T dc = dc_next[hb + u] + dh * o * (T{1} - tc * tc);
        da_t[gb + u] = dc * gg * i * (T{1} - i);
        da_t[gb + units + u] = dc * c_prev[hb + u] * f * (T{1} - f);
        da_t[gb + 2 * units + u] = dc * i * (T{1} - gg * gg);
        da_t[gb + 3 * units + u] = dh * tc * o * (T{1} - o);
        dc_prev[hb + u] = dc * f;
      }
    }
    ConstMatrixMap<T> da_m(da_t, streams, 4 * units);
    const Tensor<T>& h_prev = cache.h_prev[static_cast<std::size_t>(t)];
    g.dwh.matrix().noalias() += da_m.transpose() * h_prev.matrix();
    dh_next.matrix().noalias() = da_m * w.wh.matrix();
    dc_next = std::move(dc_prev);
    // The reset cut the dependency on the previous step's state.
    for (int s = 0; s < streams; ++s) {
      if (cache.starts[static_cast<std::size_t>(t * streams + s)]) {
        std::fill_n(dh_next.data() + static_cast<std::size_t>(s) * units, units, T{0});
        std::fill_n(dc_next.data() + static_cast<std::size_t>(s) * units, units, T{0});
      }
    }
  }
  VectorMap<T>(g.db.data(), 4 * units) = da.matrix().colwise().sum();
  g.dwx = Tensor<T>(w.wx.shape());
  g.dwx.matrix().noalias() = da.matrix().transpose() * xs.matrix();
  if (need_dx) {
    g.dxs = Tensor<T>(xs.shape());
    g.dxs.matrix().noalias() = da.matrix() * w.wx.matrix();
  }
  return g;
}

#define FPD_INSTANTIATE_LSTM(T)                                                                    \
  template LstmState<T> lstm_step(const Tensor<T>&, const LstmState<T>&, const LstmWeights<T>&);   \
  template Tensor<T> lstm_sequence(const Tensor<T>&, int, const LstmState<T>&,                     \
                                   const std::vector<std::uint8_t>&, const LstmWeights<T>&,        \
                                   LstmSequenceCache<T>*, LstmState<T>*);                          \
  template LstmGrads<T> lstm_sequence_backward(const LstmSequenceCache<T>&, const Tensor<T>&,      \
                                               const Tensor<T>&, const LstmWeights<T>&, bool);

FPD_INSTANTIATE_LSTM(float)
FPD_INSTANTIATE_LSTM(double)

#undef FPD_INSTANTIATE_LSTM

}  // namespace fpd::nn
