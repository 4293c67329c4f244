#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace fpd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

struct GenCommand {
  int beams = 5000;
  int nfg = 4;
  int nfs = 20;
  int sats = 7;
  int bw_min = 1;
  int bw_max = 8;
  double r_inter = 0.035;
  double r_intra = 0.07;
  std::uint64_t seed = 1;
  std::string out;
};

struct TrainCommand {
  std::string config;
  // Flag overrides, applied on top of the config file.
  std::optional<std::string> scenario;
  std::optional<std::uint64_t> seed;
  std::optional<long> timesteps;
  std::optional<std::string> checkpoint_out;
  std::optional<std::string> metrics_out;
  std::vector<std::string> sets;  // "key.path=json-value"
};

struct EvalCommand {
  std::string checkpoint;  // empty with `random`
  bool random = false;
  std::string space = "grid";   // random policy only
  std::string state = "plain";  // random policy only
  std::string scenario;
  int beams = 100;
  int episodes = 1;
  int envs = 8;
  std::uint64_t seed = 1;
  std::uint64_t split_seed = 7;
  double test_fraction = 0.5;
  bool whole_pool = false;
  int move_cap = 0;
  std::optional<double> scale_bw;
  std::optional<int> cap;
  std::string out;       // report JSON
  std::string plan_out;  // plan of the first episode
};

struct SweepCommand {
  std::string spec;
  std::string out;
  std::optional<std::string> scenario;
  std::optional<std::uint64_t> seed;
};

struct PlotCommand {
  std::string plan;
  std::string scenario;
  std::string out;
  std::optional<std::uint64_t> seed;  // accepted for uniformity; rendering draws nothing random
};

using Command = std::variant<GenCommand, TrainCommand, EvalCommand, SweepCommand, PlotCommand>;

struct ParseResult {
  std::optional<Command> command;
  int exit_code = kExitOk;  // meaningful when command is empty
  std::string message;      // usage, help, or error text
};

ParseResult parse_args(const std::vector<std::string>& args);

int run(const Command& cmd, std::ostream& out, std::ostream& err);

// parse_args + run with the 0 / 1 / 2 exit-code contract.
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fpd::cli
