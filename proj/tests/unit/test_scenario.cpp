#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "fpd/error.hpp"
#include "fpd/scenario.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace fpd;

TEST(GeneratePool, EmptyPool) {
  GenConfig cfg;
  cfg.n_beams = 0;
  EXPECT_TRUE(generate_pool(cfg).empty());
}

TEST(GeneratePool, BandwidthBounds) {
  GenConfig cfg;
  cfg.n_beams = 5000;
  cfg.seed = 1;
  const auto pool = generate_pool(cfg);
  ASSERT_EQ(pool.size(), 5000u);
  for (const Beam& b : pool) {
    EXPECT_GE(b.bw, 1);
    EXPECT_LE(b.bw, 8);
    EXPECT_GE(b.sat, 0);
    EXPECT_LT(b.sat, cfg.n_sats);
    EXPECT_EQ(b.sat, std::min(cfg.n_sats - 1, static_cast<int>(std::floor(b.pos[0] * cfg.n_sats))));
  }
}

TEST(GeneratePool, MeanBandwidthWithinThreeSigma) {
  GenConfig cfg;
  cfg.n_beams = 1000;
  cfg.seed = 7;
  const auto pool = generate_pool(cfg);
  double sum = 0.0;
  for (const Beam& b : pool) sum += b.bw;
  const double mean = sum / pool.size();
  // uniform{1..8}: mean 4.5, variance (8^2 - 1) / 12
  const double sigma = std::sqrt(63.0 / 12.0 / 1000.0);
  EXPECT_NEAR(mean, 4.5, 3.0 * sigma);
  EXPECT_GE(mean, 4.2);
  EXPECT_LE(mean, 4.8);
}

TEST(GeneratePool, InvalidConfig) {
  GenConfig cfg;
  cfg.bw_min = 5;
  cfg.bw_max = 2;
  EXPECT_THROW(generate_pool(cfg), ConfigError);
  cfg = GenConfig{};
  cfg.n_beams = -1;
  EXPECT_THROW(generate_pool(cfg), ConfigError);
}

TEST(GenerateConstraints, IdenticalPositionsAreInter) {
  GenConfig cfg;
  std::vector<Beam> beams{{0, 1, {0.3, 0.3}, 0}, {1, 2, {0.3, 0.3}, 1}};
  const auto c = generate_constraints(beams, cfg);
  EXPECT_EQ(c.inter, (std::set<BeamPair>{{0, 1}}));
  EXPECT_TRUE(c.intra.empty());
}

TEST(GenerateConstraints, FarApartGivesNothing) {
  GenConfig cfg;
  std::vector<Beam> beams{{0, 1, {0.1, 0.1}, 0}, {1, 1, {0.9, 0.9}, 0}, {2, 1, {0.1, 0.9}, 0}};
  const auto c = generate_constraints(beams, cfg);
  EXPECT_TRUE(c.inter.empty());
  EXPECT_TRUE(c.intra.empty());
}

TEST(GenerateConstraints, SixFixedBeams) {
  GenConfig cfg;
  cfg.r_inter = 0.035;
  cfg.r_intra = 0.07;
  const std::vector<Beam> beams{{0, 1, {0.10, 0.10}, 0}, {1, 1, {0.12, 0.10}, 0}, {2, 1, {0.10, 0.15}, 0},
                                {3, 1, {0.50, 0.50}, 1}, {4, 1, {0.53, 0.50}, 2}, {5, 1, {0.90, 0.90}, 3}};
  const auto c = generate_constraints(beams, cfg);
  EXPECT_EQ(c.inter, (std::set<BeamPair>{{0, 1}, {3, 4}}));
  EXPECT_EQ(c.intra, (std::set<BeamPair>{{0, 1}, {0, 2}, {1, 2}}));
  const auto [inter, intra] = oracle::constraints(beams, cfg.r_inter, cfg.r_intra);
  EXPECT_EQ(c.inter, inter);
  EXPECT_EQ(c.intra, intra);
}

TEST(GenerateConstraints, MatchesAllPairsOracle) {
  GenConfig cfg;
  cfg.n_beams = 400;
  cfg.r_inter = 0.05;
  cfg.r_intra = 0.1;
  cfg.seed = 11;
  const auto pool = generate_pool(cfg);
  const auto c = generate_constraints(pool, cfg);
  const auto [inter, intra] = oracle::constraints(pool, cfg.r_inter, cfg.r_intra);
  EXPECT_FALSE(inter.empty());
  EXPECT_EQ(c.inter, inter);
  EXPECT_EQ(c.intra, intra);
}

TEST(GenerateConstraints, EmptyInputRejected) {
  EXPECT_THROW(generate_constraints({}, GenConfig{}), ContractError);
}

TEST(ConstraintSet, CanonicalStorage) {
  ConstraintSet c;
  c.add_intra(5, 2);
  c.add_inter(2, 5);
  EXPECT_TRUE(c.intra.count({2, 5}));
  EXPECT_TRUE(c.inter.count({2, 5}));
  EXPECT_EQ(make_pair_canonical(9, 1), BeamPair(1, 9));
}

TEST(SplitPool, SizesAndDisjointness) {
  GenConfig cfg;
  cfg.n_beams = 100;
  const auto pool = generate_pool(cfg);
  const auto split = split_pool(pool, 0.2, 5);
  EXPECT_EQ(split.train.size(), 80u);
  EXPECT_EQ(split.test.size(), 20u);
  std::set<int> train_ids, test_ids;
  for (const Beam& b : split.train) train_ids.insert(b.id);
  for (const Beam& b : split.test) test_ids.insert(b.id);
  for (int id : test_ids) EXPECT_FALSE(train_ids.count(id));
}

TEST(SplitPool, Deterministic) {
  GenConfig cfg;
  cfg.n_beams = 300;
  const auto pool = generate_pool(cfg);
  const auto a = split_pool(pool, 0.3, 9);
  const auto b = split_pool(pool, 0.3, 9);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
}

TEST(SplitPool, CoverageOfLargePool) {
  GenConfig cfg;
  cfg.n_beams = 5000;
  const auto pool = generate_pool(cfg);
  const auto split = split_pool(pool, 0.5, 3);
  std::map<int, int> seen;
  for (const Beam& b : split.train) ++seen[b.id];
  for (const Beam& b : split.test) ++seen[b.id];
  EXPECT_EQ(seen.size(), pool.size());
  for (const Beam& b : pool) EXPECT_EQ(seen[b.id], 1) << b.id;
  EXPECT_EQ(split.test.size(), 2500u);
}

TEST(SplitPool, FractionOutOfRange) {
  const auto pool = generate_pool(GenConfig{});
  EXPECT_THROW(split_pool(pool, 0.0, 1), ConfigError);
  EXPECT_THROW(split_pool(pool, 1.0, 1), ConfigError);
}

TEST(SampleEpisode, FullPoolIsPermutation) {
  GenConfig cfg;
  cfg.n_beams = 50;
  const auto pool = generate_pool(cfg);
  auto ep = sample_episode(pool, 50, 4);
  std::set<int> ids;
  for (const Beam& b : ep) ids.insert(b.id);
  EXPECT_EQ(ids.size(), 50u);
}

TEST(SampleEpisode, SingleBeam) {
  GenConfig cfg;
  cfg.n_beams = 50;
  const auto pool = generate_pool(cfg);
  const auto ep = sample_episode(pool, 1, 4);
  ASSERT_EQ(ep.size(), 1u);
  EXPECT_NE(std::find(pool.begin(), pool.end(), ep[0]), pool.end());
}

TEST(SampleEpisode, TooManyRequested) {
  GenConfig cfg;
  cfg.n_beams = 10;
  EXPECT_THROW(sample_episode(generate_pool(cfg), 11, 1), InstanceError);
}

TEST(SampleEpisode, InclusionFrequencyIsUniform) {
  GenConfig cfg;
  cfg.n_beams = 2500;
  const auto pool = generate_pool(cfg);
  const int calls = 2000;
  std::map<int, int> hits;
  for (int s = 0; s < calls; ++s) {
    for (const Beam& b : sample_episode(pool, 100, 1000 + s)) ++hits[b.id];
  }
  const double p = 100.0 / 2500.0;
  const double mean = calls * p;
  const double sigma = std::sqrt(calls * p * (1.0 - p));
  int outside3 = 0;
  double worst = 0.0;
  for (const Beam& b : pool) {
    const double z = std::abs(hits[b.id] - mean) / sigma;
    worst = std::max(worst, z);
    if (z > 3.0) ++outside3;
  }
  // About 0.27% of beams are expected beyond 3 sigma by chance alone.
  EXPECT_LE(outside3, 25);
  EXPECT_LT(worst, 5.0);
}

TEST(ScaleBandwidth, Identity) {
  const auto pool = generate_pool(GenConfig{});
  EXPECT_EQ(scale_bandwidth(pool, 1.0, 80), pool);
}

TEST(ScaleBandwidth, DoublesAndSaturates) {
  std::vector<Beam> pool{{0, 3, {0.1, 0.2}, 0}, {1, 30, {0.3, 0.4}, 1}};
  EXPECT_EQ(scale_bandwidth(pool, 2.0, 80)[0].bw, 6);
  const auto four = scale_bandwidth(pool, 4.0, 80);
  EXPECT_EQ(four[1].bw, 80);
  EXPECT_EQ(four[1].pos, pool[1].pos);
  EXPECT_EQ(four[1].id, 1);
}

TEST(ScaleBandwidth, RoundsHalfAwayFromZero) {
  std::vector<Beam> pool{{0, 1, {0, 0}, 0}, {1, 3, {0, 0}, 0}};
  const auto out = scale_bandwidth(pool, 1.5, 80);
  EXPECT_EQ(out[0].bw, 2);  // 1.5 -> 2
  EXPECT_EQ(out[1].bw, 5);  // 4.5 -> 5
}

TEST(ScenarioIo, RoundTrip) {
  GenConfig cfg;
  cfg.n_beams = 200;
  cfg.r_inter = 0.06;
  cfg.r_intra = 0.1;
  const Scenario s = generate_scenario(cfg, 4, 20);
  const auto path = support::temp_dir("scenario_io") / "s.json";
  save_scenario(s, path);
  EXPECT_EQ(load_scenario(path), s);
}

TEST(ScenarioIo, ByteIdenticalForSameConfig) {
  GenConfig cfg;
  cfg.n_beams = 150;
  EXPECT_EQ(scenario_to_json(generate_scenario(cfg, 4, 20)), scenario_to_json(generate_scenario(cfg, 4, 20)));
}

TEST(ScenarioIo, BandwidthAboveSlotsRejected) {
  const std::string text =
      R"({"n_fg":4,"n_fs":5,"beams":[{"id":0,"bw":6,"pos":[0.1,0.1],"sat":0}],"intra":[],"inter":[],"meta":""})";
  EXPECT_THROW(scenario_from_json(text), ValidationError);
}

TEST(ScenarioIo, UnknownPairIdRejected) {
  const std::string text =
      R"({"n_fg":4,"n_fs":5,"beams":[{"id":0,"bw":1,"pos":[0.1,0.1],"sat":0}],"intra":[[0,7]],"inter":[],"meta":""})";
  EXPECT_THROW(scenario_from_json(text), ValidationError);
}

TEST(ScenarioIo, MalformedFieldNamed) {
  const std::string text = R"({"n_fg":"four","n_fs":5,"beams":[],"intra":[],"inter":[],"meta":""})";
  try {
    scenario_from_json(text);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("n_fg"), std::string::npos);
  }
}
