#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fpd/scenario.hpp"

namespace fpd {

// Indices are 0-based: group 0 is the first frequency group (reuse 1, first
// polarization), slot 0 the first frequency slot. Groups sharing a
// polarization have equal index parity.
struct Placement {
  int group = 0;
  int start = 0;

  friend bool operator==(const Placement&, const Placement&) = default;
};

struct Cell {
  int group = 0;
  int slot = 0;

  friend auto operator<=>(const Cell&, const Cell&) = default;
};

enum class ConstraintKind : std::uint8_t { Intra = 1, Inter = 2 };
enum class ActionSpaceKind { Grid, Tetris };
enum class RewardKind { Each, Final, MonteCarlo };

enum class TetrisMove { Up = 0, Down = 1, Left = 2, Right = 3, New = 4 };
inline constexpr int kTetrisActions = 5;

struct GridCell {
  int group = 0;
  int start = 0;
};

using Action = std::variant<GridCell, TetrisMove>;

struct StateRepr {
  bool lookahead = false;
};

int channel_count(StateRepr repr, ActionSpaceKind space);
int action_count(ActionSpaceKind space, int n_fg, int n_fs);
Action action_from_index(ActionSpaceKind space, int index, int n_fg, int n_fs);
int action_index(const Action& a, int n_fs);

std::string to_string(ActionSpaceKind k);
std::string to_string(RewardKind k);
ActionSpaceKind parse_action_space(const std::string& s);
RewardKind parse_reward_kind(const std::string& s);

std::vector<Cell> occupied_cells(Placement p, int bw);

// Both kinds need overlapping slot intervals; INTRA also needs the same
// group, INTER the same polarization (group parity).
bool violates(Placement a, int bw_a, Placement b, int bw_b, ConstraintKind kind);

// channels x n_fg x n_fs, row-major.
struct StateTensor {
  int channels = 0;
  int n_fg = 0;
  int n_fs = 0;
  std::vector<float> data;

  float at(int c, int g, int s) const {
    return data[(static_cast<std::size_t>(c) * n_fg + g) * n_fs + s];
  }
  float& at(int c, int g, int s) { return data[(static_cast<std::size_t>(c) * n_fg + g) * n_fs + s]; }
};

struct StepResult {
  double reward = 0.0;
  bool done = false;
  int successful = 0;     // B after the step
  bool assigned = false;  // a beam was finalized by this step
};

// EACH: B_now - B_prev. FINAL: B_now at the terminal step, else 0.
// MONTE_CARLO: mc_estimate - B_now, 0 at the terminal step.
double assignment_reward(RewardKind kind, int b_prev, int b_now, bool is_terminal,
                         std::optional<double> mc_estimate);

struct PlanEntry {
  int beam_id = 0;
  int group = 0;
  int start = 0;
  int bw = 1;
  bool successful = true;

  friend bool operator==(const PlanEntry&, const PlanEntry&) = default;
};

struct EpisodeOptions {
  // Placements for the first warm_start.size() episode beams, finalized at reset.
  std::vector<Placement> warm_start;
  // TETRIS only: after this many moves on one beam the next move acts as NEW. 0 disables.
  int tetris_move_cap = 0;
};

inline int default_move_cap(int n_fg, int n_fs) { return 4 * (n_fg + n_fs); }

class EpisodeState {
 public:
  struct Neighbor {
    int other = 0;           // local index into the episode order
    std::uint8_t kinds = 0;  // bitmask of ConstraintKind
  };

  const Scenario& scenario() const { return *scenario_; }
  ActionSpaceKind space() const { return space_; }
  StateRepr repr() const { return repr_; }
  int n_fg() const { return scenario_->n_fg; }
  int n_fs() const { return scenario_->n_fs; }

  int n_beams() const { return static_cast<int>(beams_.size()); }
  // k: number of finalized beams, and the index of the beam being assigned.
  int current_index() const { return k_; }
  bool done() const { return k_ == n_beams(); }
  const Beam& current_beam() const;
  const std::vector<Beam>& beams() const { return beams_; }
  const std::vector<Neighbor>& neighbors(int local) const { return (*neighbors_)[local]; }
  std::span<const Placement> finalized() const { return {placements_.data(), static_cast<std::size_t>(k_)}; }
  std::optional<Placement> tentative() const { return tentative_; }
  long steps() const { return steps_; }
  int moves_on_current() const { return moves_on_beam_; }
  int move_cap() const { return move_cap_; }

  // B(s): finalized beams with no violated constraint against another finalized beam.
  int count_successful() const { return successful_; }
  bool is_successful(int local) const;

  // Cells that any placement of episode beam `local` must avoid given the finalized beams.
  std::vector<std::uint8_t> conflict_mask(int local) const;
  std::vector<std::uint8_t> conflict_mask() const { return conflict_mask(k_); }

  // Constrained bandwidth still to be assigned, over the grid area, clamped to 1.
  double lookahead_value(int local) const;
  double lookahead_value() const { return lookahead_value(k_); }

  StateTensor build_state() const;

  StepResult step(const Action& a, RewardKind reward_kind);

  // Terminal B after a uniform legal random placement of every remaining beam.
  int mc_rollout(std::uint64_t seed) const;

  std::vector<PlanEntry> export_plan() const;

 private:
  friend EpisodeState reset(std::shared_ptr<const Scenario>, std::vector<Beam>, ActionSpaceKind,
                            StateRepr, std::uint64_t, EpisodeOptions);

  EpisodeState() = default;

  void finalize(Placement p);
  Placement random_placement(int bw, std::mt19937_64& rng) const;
  Placement clamp(Placement p, int bw) const;

  std::shared_ptr<const Scenario> scenario_;
  std::shared_ptr<const std::vector<std::vector<Neighbor>>> neighbors_;
  std::vector<Beam> beams_;
  std::vector<Placement> placements_;
  std::vector<int> conflicts_;  // violating finalized partners per beam
  ActionSpaceKind space_ = ActionSpaceKind::Grid;
  StateRepr repr_{};
  int k_ = 0;
  int successful_ = 0;
  long steps_ = 0;
  int moves_on_beam_ = 0;
  int move_cap_ = 0;
  std::optional<Placement> tentative_;
  std::mt19937_64 rng_;
};

EpisodeState reset(std::shared_ptr<const Scenario> scenario, std::vector<Beam> episode_beams,
                   ActionSpaceKind space, StateRepr repr, std::uint64_t seed,
                   EpisodeOptions options = {});

}  // namespace fpd
