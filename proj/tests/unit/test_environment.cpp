#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "fpd/error.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace fpd;
using support::make_scenario;
using support::random_env_action;
using support::random_scenario;

namespace {

EpisodeState start(std::shared_ptr<const Scenario> s, ActionSpaceKind space = ActionSpaceKind::Grid,
                   bool lookahead = false, std::uint64_t seed = 1, EpisodeOptions opts = {}) {
  return reset(s, s->beams, space, StateRepr{lookahead}, seed, opts);
}

}  // namespace

TEST(OccupiedCells, FigureThreeBeam) {
  // Group 1, slots 6-8 in one-based terms.
  EXPECT_EQ(occupied_cells({0, 5}, 3), (std::vector<Cell>{{0, 5}, {0, 6}, {0, 7}}));
}

TEST(OccupiedCells, SingleAndFullRow) {
  EXPECT_EQ(occupied_cells({2, 7}, 1), (std::vector<Cell>{{2, 7}}));
  const auto row = occupied_cells({1, 0}, 20);
  ASSERT_EQ(row.size(), 20u);
  for (int s = 0; s < 20; ++s) EXPECT_EQ(row[static_cast<std::size_t>(s)], (Cell{1, s}));
}

TEST(Violates, IntraNeedsSameGroup) {
  EXPECT_FALSE(violates({0, 3}, 4, {1, 3}, 4, ConstraintKind::Intra));
  EXPECT_TRUE(violates({1, 3}, 4, {1, 6}, 2, ConstraintKind::Intra));
}

TEST(Violates, InterSamePolarization) {
  // b1 at one-based group 5 slots 6-8, b2 at one-based group 3 slot 7.
  EXPECT_TRUE(violates({4, 5}, 3, {2, 6}, 1, ConstraintKind::Inter));
  EXPECT_FALSE(violates({4, 5}, 3, {3, 6}, 1, ConstraintKind::Inter));
}

TEST(Violates, DisjointSlotsNeverViolate) {
  EXPECT_FALSE(violates({0, 0}, 3, {2, 3}, 2, ConstraintKind::Inter));
  EXPECT_FALSE(violates({0, 0}, 3, {0, 3}, 2, ConstraintKind::Intra));
}

TEST(Violates, Symmetric) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> g(0, 3), s(0, 9), bw(1, 5);
  for (int i = 0; i < 2000; ++i) {
    const Placement a{g(rng), s(rng)}, b{g(rng), s(rng)};
    const int wa = bw(rng), wb = bw(rng);
    for (auto kind : {ConstraintKind::Intra, ConstraintKind::Inter}) {
      EXPECT_EQ(violates(a, wa, b, wb, kind), violates(b, wb, a, wa, kind));
    }
  }
}

TEST(ConflictMask, EmptyWithoutFinalizedBeams) {
  auto s = make_scenario(4, 20, {{0, 3, {}, 0}, {1, 2, {}, 0}}, {{0, 1}});
  const auto st = start(s);
  const auto m = st.conflict_mask();
  EXPECT_TRUE(std::all_of(m.begin(), m.end(), [](auto v) { return v == 0; }));
}

TEST(ConflictMask, FigureFourInterExpansion) {
  auto s = make_scenario(8, 20, {{0, 3, {}, 0}, {1, 1, {}, 0}}, {}, {{0, 1}});
  auto st = start(s);
  st.step(GridCell{4, 5}, RewardKind::Each);
  const auto m = st.conflict_mask();
  for (int g = 0; g < 8; ++g) {
    for (int slot = 0; slot < 20; ++slot) {
      const bool expect = g % 2 == 0 && slot >= 5 && slot <= 7;
      EXPECT_EQ(m[static_cast<std::size_t>(g * 20 + slot)], expect ? 1 : 0) << g << "," << slot;
    }
  }
}

TEST(ConflictMask, MatchesPerCellOracleAndIsSoundAndComplete) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 60; ++trial) {
    auto s = random_scenario(rng, 8, 4, 10, 0.3, 0.3);
    auto st = start(s, ActionSpaceKind::Grid, false, rng());
    while (!st.done()) {
      const auto mask = st.conflict_mask();
      ASSERT_EQ(mask, oracle::mask(st));
      const int bw = st.current_beam().bw;
      for (int g = 0; g < st.n_fg(); ++g) {
        for (int start_slot = 0; start_slot + bw <= st.n_fs(); ++start_slot) {
          bool touches = false;
          for (int x = start_slot; x < start_slot + bw; ++x) {
            touches = touches || mask[static_cast<std::size_t>(g * st.n_fs() + x)];
          }
          ASSERT_EQ(touches, oracle::placement_violates(st, {g, start_slot}));
        }
      }
      st.step(random_env_action(st, rng), RewardKind::Each);
    }
  }
}

TEST(CountSuccessful, NoConstraintsCountsEverything) {
  auto s = make_scenario(4, 10, {{0, 4, {}, 0}, {1, 4, {}, 0}, {2, 4, {}, 0}});
  auto st = start(s);
  for (int k = 0; k < 3; ++k) {
    st.step(GridCell{0, 0}, RewardKind::Each);
    EXPECT_EQ(st.count_successful(), k + 1);
  }
}

TEST(CountSuccessful, IntraPairBothFail) {
  auto s = make_scenario(4, 10, {{0, 2, {}, 0}, {1, 2, {}, 0}}, {{0, 1}});
  auto st = start(s);
  st.step(GridCell{1, 3}, RewardKind::Each);
  st.step(GridCell{1, 4}, RewardKind::Each);
  EXPECT_EQ(st.count_successful(), 0);
}

TEST(CountSuccessful, MatchesAllPairsOracleOnEveryState) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 12)(rng);
    const int n_fg = 2 * std::uniform_int_distribution<int>(1, 2)(rng);
    const int n_fs = std::uniform_int_distribution<int>(2, 10)(rng);
    auto s = random_scenario(rng, n, n_fg, n_fs, 0.3, 0.3);
    const auto space = trial % 2 ? ActionSpaceKind::Tetris : ActionSpaceKind::Grid;
    EpisodeOptions opts;
    opts.tetris_move_cap = 12;
    auto st = start(s, space, false, rng(), opts);
    while (!st.done()) {
      ASSERT_EQ(st.count_successful(), oracle::successful(oracle::placed_of(st), *s));
      st.step(random_env_action(st, rng), RewardKind::Each);
    }
    ASSERT_EQ(st.count_successful(), oracle::successful(oracle::placed_of(st), *s));
  }
}

TEST(Lookahead, ZeroWithoutRemainingConstrainedBeams) {
  auto s = make_scenario(4, 20, {{0, 3, {}, 0}, {1, 8, {}, 0}});
  EXPECT_DOUBLE_EQ(start(s).lookahead_value(), 0.0);
}

TEST(Lookahead, OneConstrainedBeamOfEight) {
  auto s = make_scenario(4, 20, {{0, 3, {}, 0}, {1, 8, {}, 0}, {2, 5, {}, 0}}, {{0, 1}});
  EXPECT_DOUBLE_EQ(start(s).lookahead_value(), 8.0 / 80.0);
}

TEST(Lookahead, ClampedAtOne) {
  std::vector<Beam> beams;
  std::vector<BeamPair> inter;
  for (int i = 0; i < 12; ++i) {
    beams.push_back({i, 10, {}, 0});
    if (i > 0) inter.push_back({0, i});
  }
  auto s = make_scenario(4, 20, beams, {}, inter);
  EXPECT_DOUBLE_EQ(start(s).lookahead_value(), 1.0);
}

TEST(BuildState, ChannelCounts) {
  auto s = make_scenario(4, 20, {{0, 3, {}, 0}, {1, 2, {}, 0}});
  EXPECT_EQ(start(s, ActionSpaceKind::Grid, false).build_state().channels, 1);
  EXPECT_EQ(start(s, ActionSpaceKind::Grid, true).build_state().channels, 2);
  EXPECT_EQ(start(s, ActionSpaceKind::Tetris, false).build_state().channels, 2);
  const auto t = start(s, ActionSpaceKind::Tetris, true).build_state();
  ASSERT_EQ(t.channels, 3);
  float sum = 0.0f;
  for (int g = 0; g < 4; ++g) {
    for (int x = 0; x < 20; ++x) sum += t.at(1, g, x);
  }
  EXPECT_FLOAT_EQ(sum, 3.0f);
}

TEST(BuildState, ChannelZeroIsMaskAndLookaheadIsConstant) {
  std::mt19937_64 rng(8);
  auto s = random_scenario(rng, 10, 4, 10, 0.3, 0.3);
  auto st = start(s, ActionSpaceKind::Grid, true, 2);
  while (!st.done()) {
    const auto t = st.build_state();
    const auto mask = st.conflict_mask();
    for (int g = 0; g < 4; ++g) {
      for (int x = 0; x < 10; ++x) {
        EXPECT_EQ(t.at(0, g, x), mask[static_cast<std::size_t>(g * 10 + x)]);
        EXPECT_FLOAT_EQ(t.at(1, g, x), static_cast<float>(st.lookahead_value()));
      }
    }
    st.step(random_env_action(st, rng), RewardKind::Each);
  }
  EXPECT_THROW(st.build_state(), StateError);
}

TEST(Reset, GridHasNoTentative) {
  auto s = make_scenario(4, 20, {{0, 3, {}, 0}});
  const auto st = start(s);
  EXPECT_FALSE(st.tentative().has_value());
  EXPECT_EQ(st.count_successful(), 0);
}

TEST(Reset, FullWidthBeamStartsAtZero) {
  auto s = make_scenario(4, 20, {{0, 20, {}, 0}});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    EXPECT_EQ(start(s, ActionSpaceKind::Tetris, false, seed).tentative()->start, 0);
  }
}

TEST(Reset, BandwidthAboveSlots) {
  auto s = make_scenario(4, 20, {{0, 3, {}, 0}});
  EXPECT_THROW(reset(s, {{7, 21, {}, 0}}, ActionSpaceKind::Grid, {}, 1), InstanceError);
}

TEST(Reset, TetrisReplayIsDeterministic) {
  std::mt19937_64 rng(21);
  auto s = random_scenario(rng, 10, 4, 10, 0.2, 0.2);
  std::vector<Action> actions;
  for (int i = 0; i < 300; ++i) actions.push_back(random_env_action(start(s, ActionSpaceKind::Tetris), rng));
  auto replay = [&] {
    auto st = start(s, ActionSpaceKind::Tetris, true, 99);
    std::vector<std::optional<Placement>> trace;
    std::vector<double> rewards;
    for (const Action& a : actions) {
      if (st.done()) break;
      trace.push_back(st.tentative());
      rewards.push_back(st.step(a, RewardKind::Each).reward);
    }
    return std::make_pair(trace, rewards);
  };
  EXPECT_EQ(replay(), replay());
}

TEST(Step, GridNonConflictingEarnsOne) {
  auto s = make_scenario(4, 20, {{0, 3, {}, 0}, {1, 3, {}, 0}}, {{0, 1}});
  auto st = start(s);
  EXPECT_DOUBLE_EQ(st.step(GridCell{0, 0}, RewardKind::Each).reward, 1.0);
  const auto r = st.step(GridCell{1, 0}, RewardKind::Each);
  EXPECT_DOUBLE_EQ(r.reward, 1.0);
  EXPECT_TRUE(r.done);
}

TEST(Step, GridStartIsClamped) {
  auto s = make_scenario(4, 20, {{0, 5, {}, 0}});
  auto st = start(s);
  st.step(GridCell{2, 19}, RewardKind::Each);
  EXPECT_EQ(st.finalized()[0], (Placement{2, 15}));
}

TEST(Step, TetrisLeftAtBoundaryIsPenalisedNoOp) {
  auto s = make_scenario(4, 20, {{0, 20, {}, 0}, {1, 1, {}, 0}});
  auto st = start(s, ActionSpaceKind::Tetris);
  const Placement before = *st.tentative();
  const auto r = st.step(TetrisMove::Left, RewardKind::Each);
  EXPECT_EQ(*st.tentative(), before);
  EXPECT_DOUBLE_EQ(r.reward, -1.0 / 80.0);
  EXPECT_DOUBLE_EQ(r.reward, -0.0125);
  EXPECT_FALSE(r.done);
  EXPECT_FALSE(r.assigned);
}

TEST(Step, TetrisMovesStayInBounds) {
  std::mt19937_64 rng(4);
  auto s = random_scenario(rng, 6, 4, 10, 0.2, 0.2);
  auto st = start(s, ActionSpaceKind::Tetris);
  for (int i = 0; i < 2000 && !st.done(); ++i) {
    st.step(random_env_action(st, rng), RewardKind::Each);
    if (st.done()) break;
    const Placement p = *st.tentative();
    ASSERT_GE(p.group, 0);
    ASSERT_LT(p.group, 4);
    ASSERT_GE(p.start, 0);
    ASSERT_LE(p.start + st.current_beam().bw, 10);
  }
}

TEST(Step, GridEpisodeOfHundredBeams) {
  std::mt19937_64 rng(6);
  auto s = random_scenario(rng, 100, 4, 20, 0.02, 0.02, 8);
  auto st = start(s);
  int steps = 0;
  StepResult r;
  while (!r.done) {
    r = st.step(random_env_action(st, rng), RewardKind::Each);
    ++steps;
  }
  EXPECT_EQ(steps, 100);
  EXPECT_THROW(st.step(GridCell{0, 0}, RewardKind::Each), StateError);
}

TEST(Step, MoveCapForcesNew) {
  auto s = make_scenario(4, 20, {{0, 2, {}, 0}, {1, 2, {}, 0}});
  EpisodeOptions opts;
  opts.tetris_move_cap = 3;
  auto st = start(s, ActionSpaceKind::Tetris, false, 1, opts);
  for (int i = 0; i < 3; ++i) EXPECT_FALSE(st.step(TetrisMove::Up, RewardKind::Each).assigned);
  EXPECT_TRUE(st.step(TetrisMove::Up, RewardKind::Each).assigned);
  EXPECT_EQ(st.current_index(), 1);
}

TEST(Step, WrongActionKind) {
  auto s = make_scenario(4, 20, {{0, 2, {}, 0}});
  auto grid = start(s);
  EXPECT_THROW(grid.step(TetrisMove::New, RewardKind::Each), ContractError);
  auto tetris = start(s, ActionSpaceKind::Tetris);
  EXPECT_THROW(tetris.step(GridCell{0, 0}, RewardKind::Each), ContractError);
}

TEST(AssignmentReward, Definitions) {
  EXPECT_DOUBLE_EQ(assignment_reward(RewardKind::Each, 5, 6, false, std::nullopt), 1.0);
  EXPECT_DOUBLE_EQ(assignment_reward(RewardKind::Final, 5, 6, false, std::nullopt), 0.0);
  EXPECT_DOUBLE_EQ(assignment_reward(RewardKind::Final, 5, 6, true, std::nullopt), 6.0);
  EXPECT_DOUBLE_EQ(assignment_reward(RewardKind::MonteCarlo, 5, 6, true, std::nullopt), 0.0);
  EXPECT_DOUBLE_EQ(assignment_reward(RewardKind::MonteCarlo, 5, 6, false, 9.0), 3.0);
  EXPECT_THROW(assignment_reward(RewardKind::MonteCarlo, 5, 6, false, std::nullopt), ContractError);
}

TEST(AssignmentReward, CollisionCostsOne) {
  auto s = make_scenario(4, 20, {{0, 4, {}, 0}, {1, 4, {}, 0}}, {{0, 1}});
  auto st = start(s);
  st.step(GridCell{2, 2}, RewardKind::Each);
  const int before = oracle::successful(oracle::placed_of(st), *s);
  const auto r = st.step(GridCell{2, 4}, RewardKind::Each);
  const int after = oracle::successful(oracle::placed_of(st), *s);
  EXPECT_EQ(before, 1);
  EXPECT_EQ(after, 0);
  EXPECT_DOUBLE_EQ(r.reward, after - before);
  EXPECT_DOUBLE_EQ(r.reward, -1.0);
}

TEST(McRollout, TerminalReturnsB) {
  std::mt19937_64 rng(2);
  auto s = random_scenario(rng, 6, 4, 10, 0.4, 0.4);
  auto st = start(s);
  while (!st.done()) st.step(random_env_action(st, rng), RewardKind::Each);
  EXPECT_EQ(st.mc_rollout(3), st.count_successful());
}

TEST(McRollout, BoundedAndLeavesStateUntouched) {
  std::mt19937_64 rng(12);
  auto s = random_scenario(rng, 10, 4, 10, 0.4, 0.4);
  auto st = start(s);
  st.step(GridCell{0, 0}, RewardKind::Each);
  st.step(GridCell{1, 0}, RewardKind::Each);
  const int b = st.count_successful();
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const int v = st.mc_rollout(seed);
    EXPECT_GE(v, 0);
    EXPECT_LE(v, 10);
    EXPECT_EQ(v, st.mc_rollout(seed));
  }
  EXPECT_EQ(st.current_index(), 2);
  EXPECT_EQ(st.count_successful(), b);
}

TEST(McRollout, UnconstrainedEveryBeamSucceeds) {
  std::mt19937_64 rng(13);
  auto s = random_scenario(rng, 9, 4, 10, 0.0, 0.0);
  auto st = start(s);
  for (int i = 0; i < 4; ++i) st.step(random_env_action(st, rng), RewardKind::Each);
  EXPECT_EQ(st.mc_rollout(1), (st.n_beams() - st.current_index()) + st.count_successful());
}

TEST(Invariants, TelescopingAndFinalConsistency) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    auto s = random_scenario(rng, 12, 4, 10, 0.3, 0.3);
    const auto space = trial % 2 ? ActionSpaceKind::Tetris : ActionSpaceKind::Grid;
    const auto kind = trial % 4 < 2 ? RewardKind::Each : RewardKind::Final;
    EpisodeOptions opts;
    opts.tetris_move_cap = 10;
    auto st = start(s, space, false, rng(), opts);
    double assigned_sum = 0.0;
    int news = 0;
    long steps = 0;
    while (!st.done()) {
      const auto r = st.step(random_env_action(st, rng), kind);
      ++steps;
      if (r.assigned) {
        assigned_sum += r.reward;
        ++news;
      } else {
        ASSERT_DOUBLE_EQ(r.reward, -1.0 / 40.0);
      }
    }
    EXPECT_DOUBLE_EQ(assigned_sum, st.count_successful());
    EXPECT_EQ(news, 12);
    if (space == ActionSpaceKind::Grid) EXPECT_EQ(steps, 12);
    for (std::size_t i = 0; i < st.finalized().size(); ++i) {
      const Placement p = st.finalized()[i];
      EXPECT_GE(p.start, 0);
      EXPECT_LE(p.start + st.beams()[i].bw, 10);
    }
  }
}

TEST(Invariants, MonteCarloRewardsTerminateAtZero) {
  std::mt19937_64 rng(41);
  auto s = random_scenario(rng, 8, 4, 10, 0.3, 0.3);
  auto st = start(s);
  StepResult r;
  while (!st.done()) r = st.step(random_env_action(st, rng), RewardKind::MonteCarlo);
  EXPECT_DOUBLE_EQ(r.reward, 0.0);
}

TEST(ExportPlan, MatchesFinalizedPlacements) {
  std::mt19937_64 rng(51);
  auto s = random_scenario(rng, 8, 4, 10, 0.3, 0.3);
  auto st = start(s);
  while (!st.done()) st.step(random_env_action(st, rng), RewardKind::Each);
  const auto plan = st.export_plan();
  ASSERT_EQ(plan.size(), 8u);
  int ok = 0;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    EXPECT_EQ(plan[i].beam_id, st.beams()[i].id);
    EXPECT_EQ(plan[i].group, st.finalized()[i].group);
    EXPECT_EQ(plan[i].start, st.finalized()[i].start);
    ok += plan[i].successful;
  }
  EXPECT_EQ(ok, st.count_successful());
}

TEST(ActionIndex, RoundTrip) {
  for (int i = 0; i < 80; ++i) {
    EXPECT_EQ(action_index(action_from_index(ActionSpaceKind::Grid, i, 4, 20), 20), i);
  }
  for (int i = 0; i < kTetrisActions; ++i) {
    EXPECT_EQ(action_index(action_from_index(ActionSpaceKind::Tetris, i, 4, 20), 20), i);
  }
  EXPECT_EQ(action_count(ActionSpaceKind::Grid, 4, 20), 80);
  EXPECT_EQ(action_count(ActionSpaceKind::Tetris, 4, 20), 5);
}
