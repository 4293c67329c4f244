#include "fpd/nn/policy.hpp"

#include <cmath>
#include <random>

namespace fpd::nn {

std::string to_string(HeadKind h) { return h == HeadKind::Mlp ? "mlp" : "lstm"; }

HeadKind parse_head(const std::string& s) {
  if (s == "mlp") return HeadKind::Mlp;
  if (s == "lstm") return HeadKind::Lstm;
  throw ConfigError("unknown policy head '" + s + "' (expected mlp|lstm)");
}

PolicyConfig PolicyConfig::for_env(ActionSpaceKind space, StateRepr repr, int n_fg, int n_fs,
                                   HeadKind head, bool with_value_head) {
  PolicyConfig cfg;
  cfg.space = space;
  cfg.lookahead = repr.lookahead;
  cfg.in_channels = channel_count(repr, space);
  cfg.n_fg = n_fg;
  cfg.n_fs = n_fs;
  cfg.head = head;
  cfg.n_outputs = action_count(space, n_fg, n_fs);
  cfg.with_value_head = with_value_head;
  return cfg;
}

void PolicyConfig::validate() const {
  if (in_channels != channel_count(StateRepr{lookahead}, space)) {
    throw ConfigError("policy in_channels " + std::to_string(in_channels) +
                      " does not match the observation layout");
  }
  if (n_fg < 1 || n_fs < 1) throw ConfigError("policy grid must be at least 1x1");
  if (conv1_filters < 1 || conv2_filters < 1) throw ConfigError("conv filter counts must be positive");
  if (conv1_kernel < 1 || conv1_kernel % 2 == 0 || conv2_kernel < 1 || conv2_kernel % 2 == 0) {
    throw ConfigError("conv kernel sizes must be odd");
  }
  if (mlp_hidden1 < 1 || mlp_hidden2 < 1 || lstm_units < 1) {
    throw ConfigError("head sizes must be positive");
  }
  if (n_outputs < 2) throw ConfigError("policy needs at least two outputs");
  if (n_outputs != action_count(space, n_fg, n_fs)) {
    throw ConfigError("policy n_outputs " + std::to_string(n_outputs) +
                      " does not match the action space");
  }
}

std::vector<std::pair<std::string, std::vector<int>>> parameter_layout(const PolicyConfig& cfg) {
  std::vector<std::pair<std::string, std::vector<int>>> out;
  const int f1 = cfg.conv1_filters;
  const int f2 = cfg.conv2_filters;
  out.push_back({"conv1.kernels", {f1, cfg.conv1_kernel, cfg.conv1_kernel, cfg.in_channels}});
  out.push_back({"conv1.bias", {f1}});
  out.push_back({"ln1.gain", {f1}});
  out.push_back({"ln1.offset", {f1}});
  out.push_back({"conv2.kernels", {f2, cfg.conv2_kernel, cfg.conv2_kernel, f1}});
  out.push_back({"conv2.bias", {f2}});
  out.push_back({"ln2.gain", {f2}});
  out.push_back({"ln2.offset", {f2}});
  if (cfg.head == HeadKind::Mlp) {
    out.push_back({"fc1.weights", {cfg.mlp_hidden1, cfg.flat_size()}});
    out.push_back({"fc1.bias", {cfg.mlp_hidden1}});
    out.push_back({"ln3.gain", {cfg.mlp_hidden1}});
    out.push_back({"ln3.offset", {cfg.mlp_hidden1}});
    out.push_back({"fc2.weights", {cfg.mlp_hidden2, cfg.mlp_hidden1}});
    out.push_back({"fc2.bias", {cfg.mlp_hidden2}});
    out.push_back({"ln4.gain", {cfg.mlp_hidden2}});
    out.push_back({"ln4.offset", {cfg.mlp_hidden2}});
  } else {
    const int h = cfg.lstm_units;
    out.push_back({"lstm.wx", {4 * h, cfg.flat_size()}});
    out.push_back({"lstm.wh", {4 * h, h}});
    out.push_back({"lstm.bias", {4 * h}});
  }
  out.push_back({"out.weights", {cfg.n_outputs, cfg.feature_size()}});
  out.push_back({"out.bias", {cfg.n_outputs}});
  if (cfg.with_value_head) {
    out.push_back({"value.weights", {1, cfg.feature_size()}});
    out.push_back({"value.bias", {1}});
  }
  return out;
}

template <typename T>
std::size_t NetParams<T>::scalar_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors) n += t.size();
  return n;
}

template <typename T>
std::size_t NetParams<T>::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  throw ContractError("no parameter named '" + name + "'");
}

template <typename T>
NetParams<T> NetParams<T>::zeros_like() const {
  NetParams<T> z;
  z.names = names;
  for (const auto& t : tensors) z.tensors.emplace_back(t.shape());
  return z;
}

template <typename T>
bool NetParams<T>::all_finite() const {
  for (const auto& t : tensors) {
    if (!ConstVectorMap<T>(t.data(), static_cast<Eigen::Index>(t.size())).allFinite()) return false;
  }
  return true;
}

template <typename T>
NetParams<T> make_params(const PolicyConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  NetParams<T> p;
  for (auto& [name, shape] : parameter_layout(cfg)) {
    Tensor<T> t(shape);
    const bool is_weight = name.ends_with(".kernels") || name.ends_with(".weights") ||
                           name == "lstm.wx" || name == "lstm.wh";
    if (name.ends_with(".gain")) {
      t.fill(T{1});
    } else if (is_weight) {
      // Uniform in +-1/sqrt(fan_in); output layers start near zero so the
      // initial policy is close to uniform.
      const std::size_t fan_in = t.size() / static_cast<std::size_t>(shape[0]);
      double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      if (name.starts_with("out.") || name.starts_with("value.")) bound *= 0.01;
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (T& v : t.values()) v = static_cast<T>(dist(rng));
    }
    p.names.push_back(name);
    p.tensors.push_back(std::move(t));
  }
  return p;
}

template <typename To, typename From>
NetParams<To> cast_params(const NetParams<From>& p) {
  NetParams<To> out;
  out.names = p.names;
  for (const auto& t : p.tensors) {
    Tensor<To> c(t.shape());
    for (std::size_t i = 0; i < t.size(); ++i) c[i] = static_cast<To>(t[i]);
    out.tensors.push_back(std::move(c));
  }
  return out;
}

template <typename T>
Tensor<T> stack_observations(const std::vector<const StateTensor*>& states) {
  if (states.empty()) throw ContractError("cannot stack an empty observation list");
  const StateTensor& first = *states.front();
  const int c = first.channels;
  const int h = first.n_fg;
  const int w = first.n_fs;
  Tensor<T> out({static_cast<int>(states.size()), h, w, c});
  T* dst = out.data();
  for (const StateTensor* s : states) {
    if (s->channels != c || s->n_fg != h || s->n_fs != w) {
      throw ShapeError("observations in a batch must share one layout");
    }
    for (int g = 0; g < h; ++g) {
      for (int x = 0; x < w; ++x) {
        for (int ch = 0; ch < c; ++ch) *dst++ = static_cast<T>(s->at(ch, g, x));
      }
    }
  }
  return out;
}

// --- PolicyNet --------------------------------------------------------------

template <typename T>
PolicyNet<T>::PolicyNet(PolicyConfig cfg, std::uint64_t seed)
    : cfg_(cfg), params_(make_params<T>(cfg, seed)) {}

template <typename T>
PolicyNet<T>::PolicyNet(PolicyConfig cfg, NetParams<T> params) : cfg_(cfg), params_(std::move(params)) {
  cfg_.validate();
  const auto layout = parameter_layout(cfg_);
  if (layout.size() != params_.count()) throw ShapeError("parameter count does not match the config");
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (layout[i].first != params_.names[i]) {
      throw ShapeError("parameter " + std::to_string(i) + " is '" + params_.names[i] + "', expected '" +
                       layout[i].first + "'");
    }
    require_shape(params_.tensors[i].shape(), layout[i].second, layout[i].first.c_str());
  }
}

template <typename T>
PolicyOutput<T> PolicyNet<T>::forward(const Tensor<T>& obs, const SequenceInput<T>* seq,
                                      PolicyCache<T>* cache) const {
  if (obs.rank() != 4) throw ShapeError("policy input must be NHWC");
  require_shape({obs.dim(1), obs.dim(2), obs.dim(3)}, {cfg_.n_fg, cfg_.n_fs, cfg_.in_channels},
                "policy observation");
  if (cfg_.head == HeadKind::Lstm && !seq) {
    throw ContractError("LSTM policy needs a recurrent state");
  }
  const NetParams<T>& p = params_;
  const int batch = obs.dim(0);

  PolicyCache<T> local;
  PolicyCache<T>& c = cache ? *cache : local;
  if (cache) c.input = obs;

  c.pre1 = conv2d(obs, p.get("conv1.kernels"), p.get("conv1.bias"), &c.cols1);
  c.act1 = relu(layer_norm(c.pre1, p.get("ln1.gain"), p.get("ln1.offset"), &c.ln1));
  c.pre2 = conv2d(c.act1, p.get("conv2.kernels"), p.get("conv2.bias"), &c.cols2);
  c.act2 = relu(layer_norm(c.pre2, p.get("ln2.gain"), p.get("ln2.offset"), &c.ln2));
  c.flat = c.act2;
  c.flat.reshape({batch, cfg_.flat_size()});

  PolicyOutput<T> out;
  if (cfg_.head == HeadKind::Mlp) {
    c.fc1 = dense(c.flat, p.get("fc1.weights"), p.get("fc1.bias"));
    c.fc1_act = relu(layer_norm(c.fc1, p.get("ln3.gain"), p.get("ln3.offset"), &c.ln3));
    c.fc2 = dense(c.fc1_act, p.get("fc2.weights"), p.get("fc2.bias"));
    c.fc2_act = relu(layer_norm(c.fc2, p.get("ln4.gain"), p.get("ln4.offset"), &c.ln4));
    c.features = c.fc2_act;
  } else {
    LstmWeights<T> w{p.get("lstm.wx"), p.get("lstm.wh"), p.get("lstm.bias")};
    LstmState<T> final_state;
    c.features = lstm_sequence(c.flat, seq->steps, seq->initial, seq->starts, w, &c.lstm, &final_state);
    out.hidden = std::move(final_state);
  }

  out.outputs = dense(c.features, p.get("out.weights"), p.get("out.bias"));
  if (cfg_.with_value_head) {
    out.values = dense(c.features, p.get("value.weights"), p.get("value.bias"));
    out.values.reshape({batch});
  }
  return out;
}

template <typename T>
PolicyOutput<T> PolicyNet<T>::act(const Tensor<T>& obs, LstmState<T>* hidden) const {
  if (cfg_.head == HeadKind::Mlp) return forward(obs);
  if (!hidden) throw ContractError("LSTM policy needs a hidden state to act");
  SequenceInput<T> seq;
  seq.steps = 1;
  seq.initial = *hidden;
  seq.starts.assign(static_cast<std::size_t>(obs.dim(0)), 0);
  PolicyOutput<T> out = forward(obs, &seq);
  *hidden = *out.hidden;
  return out;
}

template <typename T>
void PolicyNet<T>::backward(const PolicyCache<T>& c, const Tensor<T>& d_outputs,
                            const Tensor<T>* d_values, NetParams<T>& grads) const {
  const NetParams<T>& p = params_;
  if (grads.count() != p.count()) grads = p.zeros_like();
  const int batch = c.input.dim(0);
  auto set = [&](const char* name, Tensor<T>&& g) { grads.get(name) = std::move(g); };

  DenseGrads<T> out_g = dense_backward(c.features, p.get("out.weights"), d_outputs);
  set("out.weights", std::move(out_g.dweights));
  set("out.bias", std::move(out_g.dbias));
  Tensor<T> dfeat = std::move(out_g.dx);
  if (cfg_.with_value_head) {
    if (d_values) {
      Tensor<T> dv = *d_values;
      dv.reshape({batch, 1});
      DenseGrads<T> vg = dense_backward(c.features, p.get("value.weights"), dv);
      set("value.weights", std::move(vg.dweights));
      set("value.bias", std::move(vg.dbias));
      for (std::size_t i = 0; i < dfeat.size(); ++i) dfeat[i] += vg.dx[i];
    } else {
      grads.get("value.weights").fill(T{0});
      grads.get("value.bias").fill(T{0});
    }
  }

  Tensor<T> dflat;
  if (cfg_.head == HeadKind::Mlp) {
    auto ln4 = layer_norm_backward(c.ln4, p.get("ln4.gain"), relu_backward(c.fc2_act, dfeat));
    set("ln4.gain", std::move(ln4.dgain));
    set("ln4.offset", std::move(ln4.doffset));
    DenseGrads<T> fc2 = dense_backward(c.fc1_act, p.get("fc2.weights"), ln4.dx);
    set("fc2.weights", std::move(fc2.dweights));
    set("fc2.bias", std::move(fc2.dbias));
    auto ln3 = layer_norm_backward(c.ln3, p.get("ln3.gain"), relu_backward(c.fc1_act, fc2.dx));
    set("ln3.gain", std::move(ln3.dgain));
    set("ln3.offset", std::move(ln3.doffset));
    DenseGrads<T> fc1 = dense_backward(c.flat, p.get("fc1.weights"), ln3.dx);
    set("fc1.weights", std::move(fc1.dweights));
    set("fc1.bias", std::move(fc1.dbias));
    dflat = std::move(fc1.dx);
  } else {
    LstmWeights<T> w{p.get("lstm.wx"), p.get("lstm.wh"), p.get("lstm.bias")};
    LstmGrads<T> lg = lstm_sequence_backward(c.lstm, c.flat, dfeat, w);
    set("lstm.wx", std::move(lg.dwx));
    set("lstm.wh", std::move(lg.dwh));
    set("lstm.bias", std::move(lg.db));
    dflat = std::move(lg.dxs);
  }

  dflat.reshape(c.act2.shape());
  auto ln2 = layer_norm_backward(c.ln2, p.get("ln2.gain"), relu_backward(c.act2, dflat));
  set("ln2.gain", std::move(ln2.dgain));
  set("ln2.offset", std::move(ln2.doffset));
  Conv2dGrads<T> conv2 = conv2d_backward(c.act1, p.get("conv2.kernels"), ln2.dx, &c.cols2, true);
  set("conv2.kernels", std::move(conv2.dkernels));
  set("conv2.bias", std::move(conv2.dbias));
  auto ln1 = layer_norm_backward(c.ln1, p.get("ln1.gain"), relu_backward(c.act1, conv2.dx));
  set("ln1.gain", std::move(ln1.dgain));
  set("ln1.offset", std::move(ln1.doffset));
  Conv2dGrads<T> conv1 = conv2d_backward(c.input, p.get("conv1.kernels"), ln1.dx, &c.cols1, false);
  set("conv1.kernels", std::move(conv1.dkernels));
  set("conv1.bias", std::move(conv1.dbias));
}

template struct NetParams<float>;
template struct NetParams<double>;
template class PolicyNet<float>;
template class PolicyNet<double>;
template NetParams<float> make_params<float>(const PolicyConfig&, std::uint64_t);
template NetParams<double> make_params<double>(const PolicyConfig&, std::uint64_t);
template NetParams<float> cast_params<float, double>(const NetParams<double>&);
template NetParams<double> cast_params<double, float>(const NetParams<float>&);
template NetParams<float> cast_params<float, float>(const NetParams<float>&);
template Tensor<float> stack_observations<float>(const std::vector<const StateTensor*>&);
template Tensor<double> stack_observations<double>(const std::vector<const StateTensor*>&);

}  // namespace fpd::nn
