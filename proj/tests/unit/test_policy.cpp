#include <gtest/gtest.h>

#include <fstream>

#include "fpd/error.hpp"
#include "fpd/nn/checkpoint.hpp"
#include "fpd/nn/policy.hpp"
#include "gradcheck.hpp"
#include "test_util.hpp"

using namespace fpd;
using namespace fpd::nn;

namespace {

PolicyConfig small(ActionSpaceKind space, bool lookahead, HeadKind head, bool value) {
  PolicyConfig c = PolicyConfig::for_env(space, StateRepr{lookahead}, 4, 6, head, value);
  c.conv1_filters = 4;
  c.conv2_filters = 3;
  c.mlp_hidden1 = 16;
  c.mlp_hidden2 = 8;
  c.lstm_units = 8;
  return c;
}

Tensor<float> random_obs(const PolicyConfig& c, int batch, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution bit(0.3);
  Tensor<float> t({batch, c.n_fg, c.n_fs, c.in_channels});
  for (float& v : t.values()) v = bit(rng) ? 1.0f : 0.0f;
  return t;
}

}  // namespace

TEST(PolicyConfig, OutputCounts) {
  EXPECT_EQ(PolicyConfig::for_env(ActionSpaceKind::Grid, {}, 4, 20).n_outputs, 80);
  EXPECT_EQ(PolicyConfig::for_env(ActionSpaceKind::Tetris, {}, 4, 20).n_outputs, 5);
  const auto c = PolicyConfig::for_env(ActionSpaceKind::Tetris, StateRepr{true}, 4, 20);
  EXPECT_EQ(c.in_channels, 3);
  EXPECT_EQ(c.conv1_filters, 64);
  EXPECT_EQ(c.conv1_kernel, 5);
  EXPECT_EQ(c.conv2_filters, 128);
  EXPECT_EQ(c.conv2_kernel, 3);
  EXPECT_EQ(c.mlp_hidden1, 512);
  EXPECT_EQ(c.mlp_hidden2, 256);
  EXPECT_EQ(c.lstm_units, 256);
}

TEST(PolicyConfig, Validation) {
  auto c = PolicyConfig::for_env(ActionSpaceKind::Grid, {}, 4, 20);
  c.in_channels = 2;
  EXPECT_THROW(c.validate(), ConfigError);
  c = PolicyConfig::for_env(ActionSpaceKind::Grid, {}, 4, 20);
  c.conv1_kernel = 4;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(PolicyNet, ForwardShapes) {
  const auto c = small(ActionSpaceKind::Grid, true, HeadKind::Mlp, true);
  PolicyNet<float> net(c, 1);
  const auto out = net.forward(random_obs(c, 5, 1));
  EXPECT_EQ(out.outputs.shape(), (std::vector<int>{5, 24}));
  EXPECT_EQ(out.values.shape(), (std::vector<int>{5}));
  EXPECT_FALSE(out.hidden.has_value());
}

TEST(PolicyNet, ZeroFinalLayerGivesUniformSoftmax) {
  const auto c = small(ActionSpaceKind::Tetris, false, HeadKind::Mlp, false);
  PolicyNet<float> net(c, 3);
  net.params().get("out.weights").fill(0.0f);
  net.params().get("out.bias").fill(0.0f);
  const auto p = softmax(net.forward(random_obs(c, 3, 2)).outputs);
  for (float v : p.values()) EXPECT_FLOAT_EQ(v, 0.2f);
}

TEST(PolicyNet, LstmNeedsHiddenState) {
  const auto c = small(ActionSpaceKind::Grid, false, HeadKind::Lstm, true);
  PolicyNet<float> net(c, 4);
  EXPECT_THROW(net.forward(random_obs(c, 2, 3)), ContractError);
  EXPECT_THROW(net.act(random_obs(c, 2, 3)), ContractError);
  auto hidden = net.initial_hidden(2);
  const auto out = net.act(random_obs(c, 2, 3), &hidden);
  ASSERT_TRUE(out.hidden.has_value());
  EXPECT_EQ(hidden.h.shape(), (std::vector<int>{2, 8}));
  bool moved = false;
  for (float v : hidden.h.values()) moved = moved || v != 0.0f;
  EXPECT_TRUE(moved);
}

TEST(PolicyNet, ForwardIsDeterministic) {
  const auto c = small(ActionSpaceKind::Grid, true, HeadKind::Mlp, false);
  PolicyNet<float> a(c, 9), b(c, 9);
  EXPECT_EQ(a.params(), b.params());
  const auto obs = random_obs(c, 4, 5);
  EXPECT_EQ(a.forward(obs).outputs, b.forward(obs).outputs);
}

TEST(PolicyNet, StackObservationsIsNhwc) {
  StateTensor s;
  s.channels = 2;
  s.n_fg = 2;
  s.n_fs = 3;
  s.data.resize(12);
  for (int i = 0; i < 12; ++i) s.data[static_cast<std::size_t>(i)] = static_cast<float>(i);
  const auto t = stack_observations<float>({&s, &s});
  EXPECT_EQ(t.shape(), (std::vector<int>{2, 2, 3, 2}));
  // element (n=1, g=1, x=2, c=1) comes from channel 1, row 1, column 2
  EXPECT_FLOAT_EQ(t[((1 * 2 + 1) * 3 + 2) * 2 + 1], s.at(1, 1, 2));
}

TEST(PolicyNet, GradientCheckMlp) {
  std::mt19937_64 rng(201);
  for (int i = 0; i < 3; ++i) {
    const auto r = gradcheck::policy(rng, false);
    EXPECT_LE(r.max_rel_error, gradcheck::kTolerance) << r.where;
  }
}

TEST(PolicyNet, GradientCheckLstm) {
  std::mt19937_64 rng(202);
  for (int i = 0; i < 3; ++i) {
    const auto r = gradcheck::policy(rng, true);
    EXPECT_LE(r.max_rel_error, gradcheck::kTolerance) << r.where;
  }
}

TEST(Checkpoint, RoundTrip) {
  for (auto head : {HeadKind::Mlp, HeadKind::Lstm}) {
    const auto c = small(ActionSpaceKind::Tetris, true, head, true);
    PolicyNet<float> net(c, 11);
    const auto path = support::temp_dir("checkpoint") / ("net_" + to_string(head) + ".bin");
    save_checkpoint(net, path);
    const auto back = load_checkpoint(path);
    EXPECT_EQ(back.config(), net.config());
    EXPECT_EQ(back.params(), net.params());
  }
}

TEST(Checkpoint, RejectsForeignFile) {
  const auto path = support::temp_dir("checkpoint") / "junk.bin";
  std::ofstream(path) << "definitely not a checkpoint";
  EXPECT_THROW(load_checkpoint(path), ParseError);
}

TEST(Checkpoint, RejectsTruncatedFile) {
  const auto c = small(ActionSpaceKind::Grid, false, HeadKind::Mlp, false);
  const auto path = support::temp_dir("checkpoint") / "short.bin";
  save_checkpoint(PolicyNet<float>(c, 1), path);
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 10);
  EXPECT_THROW(load_checkpoint(path), ParseError);
}
