#include <gtest/gtest.h>

#include <fstream>
#include <regex>
#include <sstream>

#include "fpd/cli/cli.hpp"
#include "fpd/cli/svg.hpp"
#include "fpd/plan.hpp"
#include "test_util.hpp"

using namespace fpd;
using namespace fpd::cli;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = main_entry(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int count(const std::string& text, const std::string& needle) {
  int n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST(CliParse, Gen) {
  const auto r = parse_args({"gen", "--beams", "5000", "--nfg", "4", "--nfs", "20", "--seed", "1", "--out", "s.json"});
  ASSERT_TRUE(r.command.has_value());
  const auto& g = std::get<GenCommand>(*r.command);
  EXPECT_EQ(g.beams, 5000);
  EXPECT_EQ(g.nfg, 4);
  EXPECT_EQ(g.nfs, 20);
  EXPECT_EQ(g.seed, 1u);
  EXPECT_EQ(g.out, "s.json");
}

TEST(CliParse, EmptyArgsPrintUsage) {
  const auto r = parse_args({});
  EXPECT_FALSE(r.command.has_value());
  EXPECT_EQ(r.exit_code, kExitUsage);
  EXPECT_NE(r.message.find("gen"), std::string::npos);
  const auto run = invoke({});
  EXPECT_EQ(run.code, kExitUsage);
}

TEST(CliParse, Eval) {
  const auto r = parse_args({"eval", "--checkpoint", "c.bin", "--scenario", "s.json", "--episodes", "10"});
  ASSERT_TRUE(r.command.has_value());
  const auto& e = std::get<EvalCommand>(*r.command);
  EXPECT_EQ(e.checkpoint, "c.bin");
  EXPECT_EQ(e.scenario, "s.json");
  EXPECT_EQ(e.episodes, 10);
  EXPECT_FALSE(e.random);
}

TEST(CliParse, HelpAndErrors) {
  EXPECT_EQ(invoke({"--help"}).code, kExitOk);
  EXPECT_EQ(invoke({"gen"}).code, kExitUsage);  // --out is required
  EXPECT_EQ(invoke({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(invoke({"gen", "--beams", "many", "--out", "x"}).code, kExitUsage);
  const auto both = invoke({"eval", "--checkpoint", "c.bin", "--random", "--scenario", "s.json"});
  EXPECT_EQ(both.code, kExitUsage);
}

TEST(CliParse, TrainOverrides) {
  const auto r = parse_args({"train", "--config", "c.json", "--seed", "9", "--set", "dqn.batch_size=16", "--set",
                             "reward=final"});
  ASSERT_TRUE(r.command.has_value());
  const auto& t = std::get<TrainCommand>(*r.command);
  EXPECT_EQ(t.seed, 9u);
  EXPECT_EQ(t.sets, (std::vector<std::string>{"dqn.batch_size=16", "reward=final"}));
}

TEST(CliRun, InconsistentConfigNamesRule) {
  const auto dir = support::temp_dir("cli_bad");
  const auto cfg = dir / "bad.json";
  std::ofstream(cfg) << R"({"agent": "dqn", "head": "lstm", "scenario": "none.json"})";
  const auto r = invoke({"train", "--config", cfg.string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("LSTM"), std::string::npos);
}

TEST(CliRun, MissingFileIsRuntimeError) {
  const auto r = invoke({"eval", "--random", "--scenario", "/nonexistent/s.json"});
  EXPECT_EQ(r.code, kExitRuntime);
}

TEST(CliRun, GenTrainEvalPlotPipeline) {
  const auto dir = support::temp_dir("cli_pipeline");
  const auto scen = (dir / "s.json").string();
  ASSERT_EQ(invoke({"gen", "--beams", "200", "--nfg", "4", "--nfs", "10", "--bw-max", "4", "--seed", "3", "--out", scen}).code,
            kExitOk);
  const auto cfg = dir / "c.json";
  std::ofstream(cfg) << R"({"agent": "dqn", "timesteps": 64, "n_envs": 2, "train_beams": 16,
                            "dqn": {"learning_starts": 32, "batch_size": 8, "train_freq": 16}})";
  const auto ckpt = (dir / "c.bin").string();
  const auto train = invoke({"train", "--config", cfg.string(), "--scenario", scen, "--checkpoint-out", ckpt,
                             "--metrics-out", (dir / "m.csv").string()});
  ASSERT_EQ(train.code, kExitOk) << train.err;
  const auto plan = (dir / "plan.json").string();
  const auto eval = invoke({"eval", "--checkpoint", ckpt, "--scenario", scen, "--beams", "20", "--envs", "2",
                            "--out", (dir / "r.json").string(), "--plan-out", plan});
  ASSERT_EQ(eval.code, kExitOk) << eval.err;
  EXPECT_EQ(load_plan(plan).size(), 20u);
  const auto svg = (dir / "plan.svg").string();
  ASSERT_EQ(invoke({"plot", "--plan", plan, "--scenario", scen, "--out", svg}).code, kExitOk);
  EXPECT_NE(slurp(svg).find("<svg"), std::string::npos);
  const auto scaled = invoke({"eval", "--checkpoint", ckpt, "--scenario", scen, "--beams", "20", "--envs", "2", "--scale-bw", "2"});
  EXPECT_NE(scaled.out.find("random"), std::string::npos);
  EXPECT_EQ(invoke({"eval", "--random", "--scenario", scen, "--scale-bw", "2"}).code, kExitUsage);
  EXPECT_EQ(scaled.code, kExitOk) << scaled.err;
}

TEST(Svg, EmptyPlanIsBareLattice) {
  auto s = support::make_scenario(4, 20, {{0, 3, {}, 0}});
  const auto svg = render_plan_svg({}, *s);
  EXPECT_EQ(count(svg, "class=\"beam\""), 0);
  EXPECT_NE(svg.find("<line"), std::string::npos);
}

TEST(Svg, ViolatingIntraPairIsGold) {
  auto s = support::make_scenario(4, 20, {{0, 3, {}, 0}, {1, 2, {}, 0}, {2, 1, {}, 0}}, {{0, 1}});
  // Flags deliberately wrong: rendering must recompute them.
  const std::vector<PlanEntry> plan{{0, 1, 4, 3, true}, {1, 1, 5, 2, true}, {2, 3, 0, 1, false}};
  const auto svg = render_plan_svg(plan, *s);
  EXPECT_EQ(count(svg, "class=\"beam\""), 6);
  const std::regex cell("<rect class=\"beam\" data-beam=\"(\\d+)\"[^>]*fill=\"([^\"]+)\"");
  int gold = 0;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), cell); it != std::sregex_iterator(); ++it) {
    const int id = std::stoi((*it)[1]);
    const bool is_gold = (*it)[2] == kUnsuccessfulFill;
    EXPECT_EQ(is_gold, id != 2) << "beam " << id;
    gold += is_gold;
  }
  EXPECT_EQ(gold, 5);
}

TEST(Svg, Deterministic) {
  std::mt19937_64 rng(1);
  auto s = support::random_scenario(rng, 10, 4, 10, 0.3, 0.3);
  auto st = reset(s, s->beams, ActionSpaceKind::Grid, {}, 1);
  while (!st.done()) st.step(support::random_env_action(st, rng), RewardKind::Each);
  EXPECT_EQ(render_plan_svg(st.export_plan(), *s), render_plan_svg(st.export_plan(), *s));
}
