#include "fpd/harness/sweep.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fpd/error.hpp"
#include "fpd/harness/evaluate.hpp"
#include "json.hpp"

namespace fpd::harness {

std::size_t SweepSpec::size() const {
  return actions.size() * states.size() * rewards.size() * gammas.size() * train_beams.size() *
         agents.size() * heads.size();
}

void SweepSpec::validate() const {
  if (size() == 0) throw ConfigError("every sweep axis needs at least one value");
}

ExperimentConfig SweepSpec::cell(std::size_t index) const {
  if (index >= size()) throw ContractError("sweep cell index out of range");
  ExperimentConfig c = base;
  auto take = [&index](const auto& axis) {
    const std::size_t n = axis.size();
    const std::size_t i = index % n;
    index /= n;
    return axis[i];
  };
  // Innermost axis first, so the enumeration order is row-major over the declared axes.
  c.head = take(heads);
  c.agent = take(agents);
  c.train_beams = take(train_beams);
  c.gamma = take(gammas);
  c.reward = take(rewards);
  c.lookahead = take(states);
  c.action_space = take(actions);
  c.checkpoint_out.clear();
  c.metrics_out.clear();
  return c;
}

namespace {

using ojson = nlohmann::ordered_json;

template <typename T, typename F>
std::vector<T> axis(const ojson& axes, const char* key, std::vector<T> fallback, F convert) {
  if (!axes.contains(key)) return fallback;
  const ojson& arr = axes.at(key);
  if (!arr.is_array()) throw ConfigError(std::string("sweep axis '") + key + "' must be an array");
  std::vector<T> out;
  for (const ojson& v : arr) {
    try {
      out.push_back(convert(v));
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(std::string("sweep axis '") + key + "' has a value of the wrong type");
    }
  }
  return out;
}

}  // namespace

SweepSpec sweep_spec_from_json(const std::string& text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("sweep spec is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("sweep spec root must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() != "base" && it.key() != "axes") throw ConfigError("unknown sweep key '" + it.key() + "'");
  }
  SweepSpec s;
  if (j.contains("base")) s.base = config_from_json(j.at("base").dump());
  const ojson axes = j.value("axes", ojson::object());
  if (!axes.is_object()) throw ConfigError("sweep 'axes' must be an object");
  static const char* known[] = {"action_space", "state", "reward", "gamma", "train_beams", "agent", "head"};
  for (auto it = axes.begin(); it != axes.end(); ++it) {
    if (std::find(std::begin(known), std::end(known), it.key()) == std::end(known)) {
      throw ConfigError("unknown sweep axis '" + it.key() + "'");
    }
  }
  const ExperimentConfig& b = s.base;
  s.actions = axis<ActionSpaceKind>(axes, "action_space", {b.action_space},
                                    [](const ojson& v) { return parse_action_space(v.get<std::string>()); });
  s.states = axis<bool>(axes, "state", {b.lookahead}, [](const ojson& v) { return parse_state(v.get<std::string>()); });
  s.rewards = axis<RewardKind>(axes, "reward", {b.reward},
                               [](const ojson& v) { return parse_reward_kind(v.get<std::string>()); });
  s.gammas = axis<double>(axes, "gamma", {b.gamma}, [](const ojson& v) { return v.get<double>(); });
  s.train_beams = axis<int>(axes, "train_beams", {b.train_beams}, [](const ojson& v) { return v.get<int>(); });
  s.agents = axis<AgentKind>(axes, "agent", {b.agent}, [](const ojson& v) { return parse_agent(v.get<std::string>()); });
  s.heads = axis<nn::HeadKind>(axes, "head", {b.head}, [](const ojson& v) { return nn::parse_head(v.get<std::string>()); });
  s.validate();
  return s;
}

SweepSpec load_sweep_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open sweep spec " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return sweep_spec_from_json(buf.str());
}

std::string sweep_row_csv(const SweepRow& r) {
  const ExperimentConfig& c = r.config;
  char nums[128];
  std::snprintf(nums, sizeof(nums), "%g,%d,", c.gamma, c.train_beams);
  std::string line = to_string(c.action_space) + "," + state_name(c.lookahead) + "," + to_string(c.reward) +
                     "," + nums + to_string(c.agent) + "," + nn::to_string(c.head) + "," +
                     std::to_string(c.timesteps) + "," + std::to_string(c.seed) + ",";
  if (r.mean_b) {
    char stats[64];
    std::snprintf(stats, sizeof(stats), "%.4f,%.4f", *r.mean_b, r.std_b);
    line += stats;
  } else {
    line += "ERROR,";
  }
  return line + "\n";
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, const PoolData& pools,
                                const std::function<void(const SweepRow&)>& on_row) {
  spec.validate();
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    SweepRow row;
    row.config = spec.cell(i);
    try {
      const TrainResult tr = train(row.config, pools);
      EvalOptions eo;
      eo.n_beams = row.config.test_beams;
      eo.episodes = row.config.eval_episodes;
      eo.n_envs = row.config.n_envs;
      eo.seed = row.config.seed + 1;
      eo.tetris_move_cap = row.config.tetris_move_cap;
      eo.space = row.config.action_space;
      eo.lookahead = row.config.lookahead;
      const EvalReport rep = evaluate(tr.policy ? &*tr.policy : nullptr, pools.scenario, pools.split.test, eo);
      row.mean_b = rep.mean;
      row.std_b = rep.std;
    } catch (const Error& e) {
      row.error = e.what();
    }
    if (on_row) on_row(row);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace fpd::harness
