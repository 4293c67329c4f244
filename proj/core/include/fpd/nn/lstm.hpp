#pragma once

#include <cstdint>
#include <vector>

#include "fpd/nn/tensor.hpp"

namespace fpd::nn {

// Gate blocks in the fused weight rows are ordered input, forget, cell, output:
//   wx [4H, in], wh [4H, H], b [4H].
template <typename T>
struct LstmWeights {
  const Tensor<T>& wx;
  const Tensor<T>& wh;
  const Tensor<T>& b;
};

template <typename T>
struct LstmState {
  Tensor<T> h;  // [N, H]
  Tensor<T> c;  // [N, H]

  static LstmState zeros(int streams, int units) {
    return {Tensor<T>({streams, units}), Tensor<T>({streams, units})};
  }
};

template <typename T>
LstmState<T> lstm_step(const Tensor<T>& x, const LstmState<T>& state, const LstmWeights<T>& w);

template <typename T>
struct LstmSequenceCache {
  int steps = 0;
  int streams = 0;
  std::vector<Tensor<T>> gates;   // activated i, f, g, o per step, [N, 4H]
  std::vector<Tensor<T>> h_prev;  // after episode-start reset
  std::vector<Tensor<T>> c_prev;  // after episode-start reset
  std::vector<Tensor<T>> tanh_c;  // tanh of the new cell state
  std::vector<std::uint8_t> starts;
};

// Runs a time-major sequence: xs [steps * streams, in], row t * streams + n.
// starts[t * streams + n] != 0 zeroes stream n's h and c before step t.
// Returns hs [steps * streams, H]; `final_state` receives the last state.
template <typename T>
Tensor<T> lstm_sequence(const Tensor<T>& xs, int steps, const LstmState<T>& initial,
                        const std::vector<std::uint8_t>& starts, const LstmWeights<T>& w,
                        LstmSequenceCache<T>* cache, LstmState<T>* final_state);

template <typename T>
struct LstmGrads {
  Tensor<T> dxs;
  Tensor<T> dwx;
  Tensor<T> dwh;
  Tensor<T> db;
};

// Backpropagation through time over the cached segment, truncated at its start.
template <typename T>
LstmGrads<T> lstm_sequence_backward(const LstmSequenceCache<T>& cache, const Tensor<T>& xs,
                                    const Tensor<T>& dhs, const LstmWeights<T>& w,
                                    bool need_dx = true);

}  // namespace fpd::nn
