#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fpd/environment.hpp"
#include "fpd/nn/layers.hpp"
#include "fpd/nn/lstm.hpp"
#include "fpd/nn/tensor.hpp"

namespace fpd::nn {

enum class HeadKind { Mlp, Lstm };

std::string to_string(HeadKind h);
HeadKind parse_head(const std::string& s);

struct PolicyConfig {
  // Observation layout; in_channels must equal channel_count(repr, space).
  ActionSpaceKind space = ActionSpaceKind::Grid;
  bool lookahead = false;
  int in_channels = 1;
  int n_fg = 4;
  int n_fs = 20;

  int conv1_filters = 64;
  int conv1_kernel = 5;
  int conv2_filters = 128;
  int conv2_kernel = 3;

  HeadKind head = HeadKind::Mlp;
  int mlp_hidden1 = 512;
  int mlp_hidden2 = 256;
  int lstm_units = 256;

  int n_outputs = 80;  // n_fg * n_fs for GRID, 5 for TETRIS
  bool with_value_head = false;

  // Standard config for an environment layout.
  static PolicyConfig for_env(ActionSpaceKind space, StateRepr repr, int n_fg, int n_fs,
                              HeadKind head = HeadKind::Mlp, bool with_value_head = false);

  int feature_size() const { return head == HeadKind::Mlp ? mlp_hidden2 : lstm_units; }
  int flat_size() const { return n_fg * n_fs * conv2_filters; }
  void validate() const;

  friend bool operator==(const PolicyConfig&, const PolicyConfig&) = default;
};

// Named parameter tensors in declaration order. Also used for gradients.
template <typename T>
struct NetParams {
  std::vector<std::string> names;
  std::vector<Tensor<T>> tensors;

  std::size_t count() const { return tensors.size(); }
  std::size_t scalar_count() const;
  std::size_t index_of(const std::string& name) const;
  Tensor<T>& operator[](std::size_t i) { return tensors[i]; }
  const Tensor<T>& operator[](std::size_t i) const { return tensors[i]; }
  Tensor<T>& get(const std::string& name) { return tensors[index_of(name)]; }
  const Tensor<T>& get(const std::string& name) const { return tensors[index_of(name)]; }

  NetParams zeros_like() const;
  bool all_finite() const;

  friend bool operator==(const NetParams&, const NetParams&) = default;
};

// Names and shapes implied by a config, in declaration order.
std::vector<std::pair<std::string, std::vector<int>>> parameter_layout(const PolicyConfig& cfg);

// Sequence layout for recurrent heads. Rows are time-major: t * streams + n.
template <typename T>
struct SequenceInput {
  int steps = 1;
  LstmState<T> initial;
  std::vector<std::uint8_t> starts;  // 1 where an episode begins at that row
};

template <typename T>
struct PolicyOutput {
  Tensor<T> outputs;                  // [B, n_outputs]: Q-values or logits
  Tensor<T> values;                   // [B] when the value head is configured
  std::optional<LstmState<T>> hidden; // final recurrent state for LSTM heads
};

template <typename T>
struct PolicyCache {
  Tensor<T> input;
  Tensor<T> cols1, pre1, act1;
  LayerNormCache<T> ln1;
  Tensor<T> cols2, pre2, act2;
  LayerNormCache<T> ln2;
  Tensor<T> flat;
  Tensor<T> fc1, fc1_act, fc2, fc2_act;
  LayerNormCache<T> ln3, ln4;
  LstmSequenceCache<T> lstm;
  Tensor<T> features;
};

// conv(64, 5x5) -> LN -> ReLU -> conv(128, 3x3) -> LN -> ReLU -> flatten, then
// MLP(512, 256) with LN + ReLU after each layer, or LSTM(256); a linear output
// layer and an optional scalar value layer read the 256 head features.
template <typename T>
class PolicyNet {
 public:
  PolicyNet(PolicyConfig cfg, std::uint64_t seed);
  PolicyNet(PolicyConfig cfg, NetParams<T> params);

  const PolicyConfig& config() const { return cfg_; }
  const NetParams<T>& params() const { return params_; }
  NetParams<T>& params() { return params_; }

  // obs: [B, n_fg, n_fs, C] (NHWC). LSTM heads need `seq`; B must be steps * streams.
  PolicyOutput<T> forward(const Tensor<T>& obs, const SequenceInput<T>* seq = nullptr,
                          PolicyCache<T>* cache = nullptr) const;

  // Single decision per stream. LSTM heads require `hidden` and advance it.
  PolicyOutput<T> act(const Tensor<T>& obs, LstmState<T>* hidden = nullptr) const;

  // Writes parameter gradients into `grads` (overwritten). d_values may be null.
  void backward(const PolicyCache<T>& cache, const Tensor<T>& d_outputs, const Tensor<T>* d_values,
                NetParams<T>& grads) const;

  LstmState<T> initial_hidden(int streams) const {
    return LstmState<T>::zeros(streams, cfg_.lstm_units);
  }

 private:
  PolicyConfig cfg_;
  NetParams<T> params_;
};

template <typename T>
NetParams<T> make_params(const PolicyConfig& cfg, std::uint64_t seed);

template <typename To, typename From>
NetParams<To> cast_params(const NetParams<From>& p);

// Stacks environment observations ([C, n_fg, n_fs] each) into an NHWC batch.
template <typename T>
Tensor<T> stack_observations(const std::vector<const StateTensor*>& states);

}  // namespace fpd::nn
