#include "fpd/harness/config.hpp"

#include <fstream>
#include <sstream>

#include "fpd/error.hpp"
#include "json.hpp"

namespace fpd::harness {

using ojson = nlohmann::ordered_json;

std::string to_string(AgentKind k) {
  switch (k) {
    case AgentKind::Random: return "random";
    case AgentKind::Dqn: return "dqn";
    case AgentKind::Ppo: return "ppo";
  }
  return "?";
}

AgentKind parse_agent(const std::string& s) {
  if (s == "random") return AgentKind::Random;
  if (s == "dqn") return AgentKind::Dqn;
  if (s == "ppo") return AgentKind::Ppo;
  throw ConfigError("unknown agent '" + s + "' (expected random|dqn|ppo)");
}

std::string state_name(bool lookahead) { return lookahead ? "lookahead" : "plain"; }

bool parse_state(const std::string& s) {
  if (s == "plain") return false;
  if (s == "lookahead") return true;
  throw ConfigError("unknown state representation '" + s + "' (expected plain|lookahead)");
}

agents::DqnConfig ExperimentConfig::dqn_config() const {
  agents::DqnConfig c = dqn;
  c.gamma = gamma;
  return c;
}

agents::PpoConfig ExperimentConfig::ppo_config() const {
  agents::PpoConfig c = ppo;
  c.gamma = gamma;
  return c;
}

void ExperimentConfig::validate() const {
  if (head == nn::HeadKind::Lstm && agent != AgentKind::Ppo) {
    throw ConfigError("the LSTM head requires the PPO agent (LSTM => PPO)");
  }
  if (timesteps < 0) throw ConfigError("timesteps must be >= 0");
  if (n_envs < 1) throw ConfigError("n_envs must be >= 1");
  if (train_beams < 1 || test_beams < 1) throw ConfigError("train_beams and test_beams must be >= 1");
  if (eval_episodes < 0) throw ConfigError("eval_episodes must be >= 0");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("test_fraction must lie in (0, 1)");
  if (agent == AgentKind::Dqn) dqn_config().validate();
  if (agent == AgentKind::Ppo) ppo_config().validate();
}

int effective_move_cap(int configured, int n_fg, int n_fs) {
  if (configured < 0) return 0;
  return configured > 0 ? configured : default_move_cap(n_fg, n_fs);
}

namespace {

ojson dqn_to_json(const agents::DqnConfig& d) {
  ojson j;
  j["learning_rate"] = d.learning_rate;
  j["batch_size"] = d.batch_size;
  j["buffer_capacity"] = d.buffer_capacity;
  j["target_sync"] = d.target_sync;
  j["epsilon_start"] = d.epsilon.start;
  j["epsilon_end"] = d.epsilon.end;
  j["epsilon_fraction"] = d.epsilon.fraction;
  j["learning_starts"] = d.learning_starts;
  j["train_freq"] = d.train_freq;
  j["huber_delta"] = d.huber_delta;
  j["max_grad_norm"] = d.max_grad_norm;
  return j;
}

ojson ppo_to_json(const agents::PpoConfig& p) {
  ojson j;
  j["gae_lambda"] = p.gae_lambda;
  j["clip"] = p.clip;
  j["epochs"] = p.epochs;
  j["minibatches"] = p.minibatches;
  j["value_coef"] = p.value_coef;
  j["entropy_coef"] = p.entropy_coef;
  j["horizon"] = p.horizon;
  j["learning_rate"] = p.learning_rate;
  j["max_grad_norm"] = p.max_grad_norm;
  return j;
}

ojson to_json(const ExperimentConfig& c) {
  ojson j;
  j["scenario"] = c.scenario;
  j["action_space"] = to_string(c.action_space);
  j["state"] = state_name(c.lookahead);
  j["reward"] = to_string(c.reward);
  j["gamma"] = c.gamma;
  j["agent"] = to_string(c.agent);
  j["head"] = nn::to_string(c.head);
  j["train_beams"] = c.train_beams;
  j["test_beams"] = c.test_beams;
  j["timesteps"] = c.timesteps;
  j["n_envs"] = c.n_envs;
  j["seed"] = c.seed;
  j["split_seed"] = c.split_seed;
  j["test_fraction"] = c.test_fraction;
  j["eval_episodes"] = c.eval_episodes;
  j["tetris_move_cap"] = c.tetris_move_cap;
  j["dqn"] = dqn_to_json(c.dqn);
  j["ppo"] = ppo_to_json(c.ppo);
  j["checkpoint_out"] = c.checkpoint_out;
  j["metrics_out"] = c.metrics_out;
  j["record_wallclock"] = c.record_wallclock;
  return j;
}

// Overlays `patch` onto `base`, rejecting keys the base does not have.
void overlay(ojson& base, const ojson& patch, const std::string& where) {
  if (!patch.is_object()) throw ConfigError("config section '" + where + "' must be an object");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string name = where.empty() ? it.key() : where + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError("unknown config key '" + name + "'");
    ojson& slot = base[it.key()];
    if (slot.is_object()) {
      overlay(slot, it.value(), name);
    } else {
      slot = it.value();
    }
  }
}

template <typename T>
T read(const ojson& j, const char* key, const std::string& where = "") {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    const std::string name = where.empty() ? key : where + "." + key;
    throw ConfigError("config key '" + name + "' has the wrong type");
  }
}

ExperimentConfig from_json(const ojson& j) {
  ExperimentConfig c;
  c.scenario = read<std::string>(j, "scenario");
  c.action_space = parse_action_space(read<std::string>(j, "action_space"));
  c.lookahead = parse_state(read<std::string>(j, "state"));
  c.reward = parse_reward_kind(read<std::string>(j, "reward"));
  c.gamma = read<double>(j, "gamma");
  c.agent = parse_agent(read<std::string>(j, "agent"));
  c.head = nn::parse_head(read<std::string>(j, "head"));
  c.train_beams = read<int>(j, "train_beams");
  c.test_beams = read<int>(j, "test_beams");
  c.timesteps = read<long>(j, "timesteps");
  c.n_envs = read<int>(j, "n_envs");
  c.seed = read<std::uint64_t>(j, "seed");
  c.split_seed = read<std::uint64_t>(j, "split_seed");
  c.test_fraction = read<double>(j, "test_fraction");
  c.eval_episodes = read<int>(j, "eval_episodes");
  c.tetris_move_cap = read<int>(j, "tetris_move_cap");

  const ojson& d = j.at("dqn");
  c.dqn.learning_rate = read<double>(d, "learning_rate", "dqn");
  c.dqn.batch_size = read<int>(d, "batch_size", "dqn");
  c.dqn.buffer_capacity = read<int>(d, "buffer_capacity", "dqn");
  c.dqn.target_sync = read<long>(d, "target_sync", "dqn");
  c.dqn.epsilon.start = read<double>(d, "epsilon_start", "dqn");
  c.dqn.epsilon.end = read<double>(d, "epsilon_end", "dqn");
  c.dqn.epsilon.fraction = read<double>(d, "epsilon_fraction", "dqn");
  c.dqn.learning_starts = read<long>(d, "learning_starts", "dqn");
  c.dqn.train_freq = read<int>(d, "train_freq", "dqn");
  c.dqn.huber_delta = read<double>(d, "huber_delta", "dqn");
  c.dqn.max_grad_norm = read<double>(d, "max_grad_norm", "dqn");

  const ojson& p = j.at("ppo");
  c.ppo.gae_lambda = read<double>(p, "gae_lambda", "ppo");
  c.ppo.clip = read<double>(p, "clip", "ppo");
  c.ppo.epochs = read<int>(p, "epochs", "ppo");
  c.ppo.minibatches = read<int>(p, "minibatches", "ppo");
  c.ppo.value_coef = read<double>(p, "value_coef", "ppo");
  c.ppo.entropy_coef = read<double>(p, "entropy_coef", "ppo");
  c.ppo.horizon = read<int>(p, "horizon", "ppo");
  c.ppo.learning_rate = read<double>(p, "learning_rate", "ppo");
  c.ppo.max_grad_norm = read<double>(p, "max_grad_norm", "ppo");

  c.checkpoint_out = read<std::string>(j, "checkpoint_out");
  c.metrics_out = read<std::string>(j, "metrics_out");
  c.record_wallclock = read<bool>(j, "record_wallclock");
  c.dqn.gamma = c.gamma;
  c.ppo.gamma = c.gamma;
  return c;
}

}  // namespace

ExperimentConfig config_from_json(const std::string& text) {
  ojson patch;
  try {
    patch = ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ojson j = to_json(ExperimentConfig{});
  overlay(j, patch, "");
  return from_json(j);
}

std::string config_to_json(const ExperimentConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str());
}

}  // namespace fpd::harness
