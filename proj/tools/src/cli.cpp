#include "fpd/cli/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "fpd/cli/svg.hpp"
#include "fpd/error.hpp"
#include "fpd/harness/config.hpp"
#include "fpd/harness/evaluate.hpp"
#include "fpd/harness/nonstationarity.hpp"
#include "fpd/harness/sweep.hpp"
#include "fpd/harness/train.hpp"
#include "fpd/nn/checkpoint.hpp"
#include "fpd/plan.hpp"
#include "fpd/scenario.hpp"
#include "json.hpp"

namespace fpd::cli {

namespace {

using ojson = nlohmann::ordered_json;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw Error("failed writing " + path);
}

std::string fmt(double v, const char* spec = "%.3f") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

// "a.b=value": value is JSON when it parses, otherwise a string.
void apply_set(ojson& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("--set expects key=value, got '" + assignment + "'");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  ojson value = ojson::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  ojson* node = &j;
  std::size_t pos = 0;
  while (true) {
    const auto dot = path.find('.', pos);
    const std::string key = path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (dot == std::string::npos) {
      (*node)[key] = value;
      break;
    }
    ojson& child = (*node)[key];
    if (child.is_null()) child = ojson::object();
    node = &child;
    pos = dot + 1;
  }
}

int run_gen(const GenCommand& c, std::ostream& out) {
  GenConfig g;
  g.n_beams = c.beams;
  g.n_sats = c.sats;
  g.bw_min = c.bw_min;
  g.bw_max = c.bw_max;
  g.r_inter = c.r_inter;
  g.r_intra = c.r_intra;
  g.seed = c.seed;
  const Scenario s = generate_scenario(g, c.nfg, c.nfs);
  save_scenario(s, c.out);
  out << "wrote " << c.out << ": " << s.beams.size() << " beams, " << s.constraints.intra.size()
      << " intra pairs, " << s.constraints.inter.size() << " inter pairs\n";
  return kExitOk;
}

int run_train(const TrainCommand& c, std::ostream& out) {
  ojson j;
  try {
    j = ojson::parse(read_file(c.config));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config " + c.config + " is not valid JSON: " + e.what());
  }
  if (c.scenario) j["scenario"] = *c.scenario;
  if (c.seed) j["seed"] = *c.seed;
  if (c.timesteps) j["timesteps"] = *c.timesteps;
  if (c.checkpoint_out) j["checkpoint_out"] = *c.checkpoint_out;
  if (c.metrics_out) j["metrics_out"] = *c.metrics_out;
  for (const std::string& s : c.sets) apply_set(j, s);
  const harness::ExperimentConfig cfg = harness::config_from_json(j.dump());
  cfg.validate();
  const harness::TrainResult r = harness::train(cfg);
  out << "trained " << harness::to_string(cfg.agent) << " for " << r.steps << " steps, " << r.episodes
      << " episodes";
  if (!r.metrics.empty()) out << ", last mean_B " << fmt(r.metrics.back().mean_b);
  out << "\n";
  if (!cfg.checkpoint_out.empty() && r.policy) out << "checkpoint " << cfg.checkpoint_out << "\n";
  if (!cfg.metrics_out.empty()) out << "metrics " << cfg.metrics_out << "\n";
  return kExitOk;
}

int run_eval(const EvalCommand& c, std::ostream& out) {
  if (c.random == !c.checkpoint.empty()) {
    throw ConfigError("eval needs exactly one of --checkpoint or --random");
  }
  auto scenario = std::make_shared<const Scenario>(load_scenario(c.scenario));
  const std::vector<Beam> pool =
      c.whole_pool ? scenario->beams : split_pool(scenario->beams, c.test_fraction, c.split_seed).test;

  std::optional<nn::PolicyNet<float>> policy;
  if (!c.random) policy = nn::load_checkpoint(c.checkpoint);

  harness::EvalOptions eo;
  eo.n_beams = c.beams;
  eo.episodes = c.episodes;
  eo.n_envs = c.envs;
  eo.seed = c.seed;
  eo.tetris_move_cap = c.move_cap;
  eo.space = parse_action_space(c.space);
  eo.lookahead = harness::parse_state(c.state);

  if (c.scale_bw) {
    if (!policy) throw ConfigError("--scale-bw compares a checkpoint against the random baseline");
    const int cap = c.cap.value_or(scenario->n_fs);
    const auto rows = harness::nonstationarity_eval(*policy, scenario, pool, {1.0, *c.scale_bw}, cap, eo);
    out << "factor,agent_mean,agent_std,random_mean,random_std\n";
    for (const auto& r : rows) {
      out << fmt(r.factor, "%g") << ',' << fmt(r.agent.mean) << ',' << fmt(r.agent.std) << ','
          << fmt(r.random.mean) << ',' << fmt(r.random.std) << "\n";
    }
    if (!c.out.empty()) {
      ojson j = ojson::array();
      for (const auto& r : rows) {
        j.push_back({{"factor", r.factor},
                     {"agent", ojson::parse(harness::report_to_json(r.agent))},
                     {"random", ojson::parse(harness::report_to_json(r.random))}});
      }
      write_file(c.out, j.dump(2) + "\n");
    }
    return kExitOk;
  }

  const nn::PolicyNet<float>* p = policy ? &*policy : nullptr;
  const harness::EvalReport rep = harness::evaluate(p, scenario, pool, eo);
  out << "mean " << fmt(rep.mean) << " std " << fmt(rep.std) << " over " << rep.counts.size()
      << " episodes (" << fmt(rep.ms_per_decision, "%.3g") << " ms/decision)\n";
  if (!c.out.empty()) write_file(c.out, harness::report_to_json(rep));
  if (!c.plan_out.empty()) save_plan(harness::evaluate_plan(p, scenario, pool, eo), c.plan_out);
  return kExitOk;
}

int run_sweep(const SweepCommand& c, std::ostream& out, std::ostream& err) {
  harness::SweepSpec spec = harness::load_sweep_spec(c.spec);
  if (c.scenario) spec.base.scenario = *c.scenario;
  if (c.seed) spec.base.seed = *c.seed;
  spec.validate();
  for (std::size_t i = 0; i < spec.size(); ++i) spec.cell(i).validate();
  auto scenario = std::make_shared<const Scenario>(load_scenario(spec.base.scenario));
  const harness::PoolData pools = harness::prepare_pools(scenario, spec.base);

  std::ofstream csv(c.out, std::ios::binary);
  if (!csv) throw Error("cannot open " + c.out + " for writing");
  csv << harness::kSweepHeader << "\n";
  int failures = 0;
  const auto rows = harness::run_sweep(spec, pools, [&](const harness::SweepRow& row) {
    csv << harness::sweep_row_csv(row) << std::flush;
    if (!row.error.empty()) {
      ++failures;
      err << "cell failed: " << row.error << "\n";
    }
  });
  out << "wrote " << rows.size() << " rows to " << c.out;
  if (failures > 0) out << " (" << failures << " failed)";
  out << "\n";
  return kExitOk;
}

int run_plot(const PlotCommand& c, std::ostream& out) {
  const Scenario scenario = load_scenario(c.scenario);
  const std::vector<PlanEntry> plan = load_plan(c.plan);
  write_file(c.out, render_plan_svg(plan, scenario));
  out << "wrote " << c.out << "\n";
  return kExitOk;
}

}  // namespace

ParseResult parse_args(const std::vector<std::string>& args) {
  CLI::App app{"Frequency plan design with deep reinforcement learning", "fpd"};
  app.require_subcommand(1, 1);

  GenCommand gen;
  auto* g = app.add_subcommand("gen", "Generate a synthetic beam scenario");
  g->add_option("--beams", gen.beams, "Number of beams")->capture_default_str();
  g->add_option("--nfg", gen.nfg, "Frequency groups")->capture_default_str();
  g->add_option("--nfs", gen.nfs, "Frequency slots")->capture_default_str();
  g->add_option("--sats", gen.sats, "Satellite bands")->capture_default_str();
  g->add_option("--bw-min", gen.bw_min, "Smallest bandwidth demand")->capture_default_str();
  g->add_option("--bw-max", gen.bw_max, "Largest bandwidth demand")->capture_default_str();
  g->add_option("--r-inter", gen.r_inter, "Inter-group constraint radius")->capture_default_str();
  g->add_option("--r-intra", gen.r_intra, "Intra-group constraint radius")->capture_default_str();
  g->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  g->add_option("--out", gen.out, "Output scenario JSON")->required();

  TrainCommand train;
  auto* t = app.add_subcommand("train", "Train an agent from an experiment config");
  t->add_option("--config", train.config, "Experiment config JSON")->required();
  t->add_option("--scenario", train.scenario, "Override the scenario path");
  t->add_option("--seed", train.seed, "Override the master seed");
  t->add_option("--timesteps", train.timesteps, "Override the summed environment steps");
  t->add_option("--checkpoint-out", train.checkpoint_out, "Override the checkpoint path");
  t->add_option("--metrics-out", train.metrics_out, "Override the metrics CSV path");
  t->add_option("--set", train.sets, "Override any config key: key.path=value");

  EvalCommand ev;
  auto* e = app.add_subcommand("eval", "Evaluate a checkpoint or the random policy on the test pool");
  e->add_option("--checkpoint", ev.checkpoint, "Policy checkpoint");
  e->add_flag("--random", ev.random, "Evaluate the uniform random policy");
  e->add_option("--space", ev.space, "Action space for --random (grid|tetris)")->capture_default_str();
  e->add_option("--state", ev.state, "State representation for --random (plain|lookahead)")->capture_default_str();
  e->add_option("--scenario", ev.scenario, "Scenario JSON")->required();
  e->add_option("--beams", ev.beams, "Beams per episode")->capture_default_str();
  e->add_option("--episodes", ev.episodes, "Episodes per evaluation stream")->capture_default_str();
  e->add_option("--envs", ev.envs, "Parallel evaluation streams")->capture_default_str();
  e->add_option("--seed", ev.seed, "Evaluation seed")->capture_default_str();
  e->add_option("--split-seed", ev.split_seed, "Train/test split seed")->capture_default_str();
  e->add_option("--test-fraction", ev.test_fraction, "Test share of the pool")->capture_default_str();
  e->add_flag("--whole-pool", ev.whole_pool, "Sample from the whole pool instead of the test split");
  e->add_option("--move-cap", ev.move_cap, "TETRIS moves per beam before NEW (0: default)");
  e->add_option("--scale-bw", ev.scale_bw, "Also evaluate with bandwidths scaled by this factor");
  e->add_option("--cap", ev.cap, "Bandwidth cap for --scale-bw (default: n_fs)");
  e->add_option("--out", ev.out, "Report JSON");
  e->add_option("--plan-out", ev.plan_out, "Plan JSON of the first episode");

  SweepCommand sw;
  auto* s = app.add_subcommand("sweep", "Train and evaluate every combination of a sweep spec");
  s->add_option("--spec", sw.spec, "Sweep spec JSON")->required();
  s->add_option("--out", sw.out, "Results CSV")->required();
  s->add_option("--scenario", sw.scenario, "Override the scenario path");
  s->add_option("--seed", sw.seed, "Override the master seed");

  PlotCommand pl;
  auto* p = app.add_subcommand("plot", "Render a frequency plan as SVG");
  p->add_option("--plan", pl.plan, "Plan JSON")->required();
  p->add_option("--scenario", pl.scenario, "Scenario JSON")->required();
  p->add_option("--out", pl.out, "Output SVG")->required();
  p->add_option("--seed", pl.seed, "Accepted for uniformity");

  ParseResult res;
  if (args.empty()) {
    res.exit_code = kExitUsage;
    res.message = app.help();
    return res;
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    res.exit_code = kExitOk;
    res.message = app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help();
    return res;
  } catch (const CLI::ParseError& err) {
    res.exit_code = kExitUsage;
    res.message = std::string(err.what()) + "\nRun with --help for usage.\n";
    return res;
  }
  if (g->parsed()) res.command = gen;
  if (t->parsed()) res.command = train;
  if (e->parsed()) res.command = ev;
  if (s->parsed()) res.command = sw;
  if (p->parsed()) res.command = pl;
  return res;
}

int run(const Command& cmd, std::ostream& out, std::ostream& err) {
  return std::visit(
      [&](const auto& c) -> int {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, GenCommand>) return run_gen(c, out);
        if constexpr (std::is_same_v<T, TrainCommand>) return run_train(c, out);
        if constexpr (std::is_same_v<T, EvalCommand>) return run_eval(c, out);
        if constexpr (std::is_same_v<T, SweepCommand>) return run_sweep(c, out, err);
        if constexpr (std::is_same_v<T, PlotCommand>) return run_plot(c, out);
      },
      cmd);
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const ParseResult parsed = parse_args(args);
  if (!parsed.command) {
    (parsed.exit_code == kExitOk ? out : err) << parsed.message;
    return parsed.exit_code;
  }
  try {
    return run(*parsed.command, out, err);
  } catch (const ConfigError& e) {
    err << "fpd: usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "fpd: error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace fpd::cli
