#include "fpd/environment.hpp"

#include <algorithm>
#include <unordered_map>

#include "fpd/error.hpp"

namespace fpd {

int channel_count(StateRepr repr, ActionSpaceKind space) {
  return 1 + (space == ActionSpaceKind::Tetris ? 1 : 0) + (repr.lookahead ? 1 : 0);
}

int action_count(ActionSpaceKind space, int n_fg, int n_fs) {
  return space == ActionSpaceKind::Grid ? n_fg * n_fs : kTetrisActions;
}

Action action_from_index(ActionSpaceKind space, int index, int n_fg, int n_fs) {
  if (index < 0 || index >= action_count(space, n_fg, n_fs)) {
    throw ContractError("action index " + std::to_string(index) + " out of range");
  }
  if (space == ActionSpaceKind::Grid) return GridCell{index / n_fs, index % n_fs};
  return static_cast<TetrisMove>(index);
}

int action_index(const Action& a, int n_fs) {
  if (const auto* cell = std::get_if<GridCell>(&a)) return cell->group * n_fs + cell->start;
  return static_cast<int>(std::get<TetrisMove>(a));
}

std::string to_string(ActionSpaceKind k) { return k == ActionSpaceKind::Grid ? "grid" : "tetris"; }

std::string to_string(RewardKind k) {
  switch (k) {
    case RewardKind::Each: return "each";
    case RewardKind::Final: return "final";
    case RewardKind::MonteCarlo: return "mc";
  }
  return "?";
}

ActionSpaceKind parse_action_space(const std::string& s) {
  if (s == "grid") return ActionSpaceKind::Grid;
  if (s == "tetris") return ActionSpaceKind::Tetris;
  throw ConfigError("unknown action space '" + s + "' (expected grid|tetris)");
}

RewardKind parse_reward_kind(const std::string& s) {
  if (s == "each") return RewardKind::Each;
  if (s == "final") return RewardKind::Final;
  if (s == "mc" || s == "monte-carlo") return RewardKind::MonteCarlo;
  throw ConfigError("unknown reward '" + s + "' (expected each|final|mc)");
}

std::vector<Cell> occupied_cells(Placement p, int bw) {
  std::vector<Cell> cells;
  cells.reserve(static_cast<std::size_t>(bw));
  for (int s = p.start; s < p.start + bw; ++s) cells.push_back({p.group, s});
  return cells;
}

bool violates(Placement a, int bw_a, Placement b, int bw_b, ConstraintKind kind) {
  const bool overlap = a.start < b.start + bw_b && b.start < a.start + bw_a;
  if (!overlap) return false;
  if (kind == ConstraintKind::Intra) return a.group == b.group;
  return a.group % 2 == b.group % 2;
}

double assignment_reward(RewardKind kind, int b_prev, int b_now, bool is_terminal,
                         std::optional<double> mc_estimate) {
  switch (kind) {
    case RewardKind::Each:
      return static_cast<double>(b_now - b_prev);
    case RewardKind::Final:
      return is_terminal ? static_cast<double>(b_now) : 0.0;
    case RewardKind::MonteCarlo:
      if (is_terminal) return 0.0;
      if (!mc_estimate) throw ContractError("Monte-Carlo reward needs a rollout estimate");
      return *mc_estimate - static_cast<double>(b_now);
  }
  return 0.0;
}

// --- EpisodeState -----------------------------------------------------------

namespace {

bool pair_violates(Placement a, int bw_a, Placement b, int bw_b, std::uint8_t kinds) {
  if ((kinds & static_cast<std::uint8_t>(ConstraintKind::Intra)) &&
      violates(a, bw_a, b, bw_b, ConstraintKind::Intra)) {
    return true;
  }
  return (kinds & static_cast<std::uint8_t>(ConstraintKind::Inter)) &&
         violates(a, bw_a, b, bw_b, ConstraintKind::Inter);
}

}  // namespace

EpisodeState reset(std::shared_ptr<const Scenario> scenario, std::vector<Beam> episode_beams,
                   ActionSpaceKind space, StateRepr repr, std::uint64_t seed,
                   EpisodeOptions options) {
  if (!scenario) throw ContractError("reset needs a scenario");
  if (episode_beams.empty()) throw InstanceError("episode needs at least one beam");
  if (options.warm_start.size() > episode_beams.size()) {
    throw InstanceError("warm-start plan longer than the episode");
  }
  if (options.tetris_move_cap < 0) throw ConfigError("tetris move cap must be >= 0");

  std::unordered_map<int, int> local_of;
  for (std::size_t i = 0; i < episode_beams.size(); ++i) {
    const Beam& b = episode_beams[i];
    if (b.bw < 1 || b.bw > scenario->n_fs) {
      throw InstanceError("beam " + std::to_string(b.id) + " needs " + std::to_string(b.bw) +
                          " slots but the grid has " + std::to_string(scenario->n_fs));
    }
    if (!local_of.emplace(b.id, static_cast<int>(i)).second) {
      throw InstanceError("beam " + std::to_string(b.id) + " appears twice in the episode");
    }
  }

  auto neighbors = std::make_shared<std::vector<std::vector<EpisodeState::Neighbor>>>(
      episode_beams.size());
  auto add_pairs = [&](const std::set<BeamPair>& pairs, ConstraintKind kind) {
    for (const auto& [a, b] : pairs) {
      auto ia = local_of.find(a);
      if (ia == local_of.end()) continue;
      auto ib = local_of.find(b);
      if (ib == local_of.end()) continue;
      for (auto [from, to] : {std::pair{ia->second, ib->second}, std::pair{ib->second, ia->second}}) {
        auto& list = (*neighbors)[static_cast<std::size_t>(from)];
        auto it = std::find_if(list.begin(), list.end(),
                               [to = to](const EpisodeState::Neighbor& n) { return n.other == to; });
        if (it == list.end()) {
          list.push_back({to, static_cast<std::uint8_t>(kind)});
        } else {
          it->kinds |= static_cast<std::uint8_t>(kind);
        }
      }
    }
  };
  add_pairs(scenario->constraints.intra, ConstraintKind::Intra);
  add_pairs(scenario->constraints.inter, ConstraintKind::Inter);
  // Deterministic neighbour order independent of set iteration details.
  for (auto& list : *neighbors) {
    std::sort(list.begin(), list.end(),
              [](const EpisodeState::Neighbor& x, const EpisodeState::Neighbor& y) {
                return x.other < y.other;
              });
  }

  EpisodeState st;
  st.scenario_ = std::move(scenario);
  st.neighbors_ = std::move(neighbors);
  st.beams_ = std::move(episode_beams);
  st.placements_.assign(st.beams_.size(), Placement{});
  st.conflicts_.assign(st.beams_.size(), 0);
  st.space_ = space;
  st.repr_ = repr;
  st.move_cap_ = options.tetris_move_cap;
  st.rng_.seed(seed);

  for (const Placement& p : options.warm_start) {
    const int bw = st.beams_[static_cast<std::size_t>(st.k_)].bw;
    if (p.group < 0 || p.group >= st.n_fg() || p.start < 0 || p.start + bw > st.n_fs()) {
      throw InstanceError("warm-start placement out of bounds for beam " +
                          std::to_string(st.beams_[static_cast<std::size_t>(st.k_)].id));
    }
    st.finalize(p);
  }
  if (space == ActionSpaceKind::Tetris && !st.done()) {
    st.tentative_ = st.random_placement(st.current_beam().bw, st.rng_);
  }
  return st;
}

const Beam& EpisodeState::current_beam() const {
  if (done()) throw StateError("episode is finished; there is no current beam");
  return beams_[static_cast<std::size_t>(k_)];
}

bool EpisodeState::is_successful(int local) const {
  return local < k_ && conflicts_[static_cast<std::size_t>(local)] == 0;
}

Placement EpisodeState::random_placement(int bw, std::mt19937_64& rng) const {
  std::uniform_int_distribution<int> group(0, n_fg() - 1);
  std::uniform_int_distribution<int> start(0, n_fs() - bw);
  const int g = group(rng);
  const int s = start(rng);
  return {g, s};
}

Placement EpisodeState::clamp(Placement p, int bw) const {
  return {std::clamp(p.group, 0, n_fg() - 1), std::clamp(p.start, 0, n_fs() - bw)};
}

void EpisodeState::finalize(Placement p) {
  const auto i = static_cast<std::size_t>(k_);
  const int bw = beams_[i].bw;
  placements_[i] = p;
  for (const Neighbor& n : (*neighbors_)[i]) {
    if (n.other >= k_) continue;
    const auto j = static_cast<std::size_t>(n.other);
    if (!pair_violates(p, bw, placements_[j], beams_[j].bw, n.kinds)) continue;
    if (conflicts_[j] == 0) --successful_;
    ++conflicts_[j];
    ++conflicts_[i];
  }
  if (conflicts_[i] == 0) ++successful_;
  ++k_;
  moves_on_beam_ = 0;
}

std::vector<std::uint8_t> EpisodeState::conflict_mask(int local) const {
  const int fg = n_fg();
  const int fs = n_fs();
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(fg * fs), 0);
  if (local < 0 || local >= n_beams()) return mask;
  for (const Neighbor& n : (*neighbors_)[static_cast<std::size_t>(local)]) {
    if (n.other >= k_) continue;
    const auto j = static_cast<std::size_t>(n.other);
    const Placement p = placements_[j];
    const int end = p.start + beams_[j].bw;
    if (n.kinds & static_cast<std::uint8_t>(ConstraintKind::Inter)) {
      for (int g = p.group % 2; g < fg; g += 2) {
        for (int s = p.start; s < end; ++s) mask[static_cast<std::size_t>(g * fs + s)] = 1;
      }
    } else {
      for (int s = p.start; s < end; ++s) mask[static_cast<std::size_t>(p.group * fs + s)] = 1;
    }
  }
  return mask;
}

double EpisodeState::lookahead_value(int local) const {
  if (local < 0 || local >= n_beams()) return 0.0;
  long pending = 0;
  for (const Neighbor& n : (*neighbors_)[static_cast<std::size_t>(local)]) {
    if (n.other > local && n.other >= k_) pending += beams_[static_cast<std::size_t>(n.other)].bw;
  }
  const double area = static_cast<double>(n_fg()) * n_fs();
  return std::min(1.0, static_cast<double>(pending) / area);
}

StateTensor EpisodeState::build_state() const {
  if (done()) throw StateError("build_state called on a terminal state");
  StateTensor t;
  t.channels = channel_count(repr_, space_);
  t.n_fg = n_fg();
  t.n_fs = n_fs();
  const std::size_t plane = static_cast<std::size_t>(t.n_fg) * t.n_fs;
  t.data.assign(plane * static_cast<std::size_t>(t.channels), 0.0f);

  const auto mask = conflict_mask(k_);
  for (std::size_t i = 0; i < plane; ++i) t.data[i] = mask[i];

  int c = 1;
  if (space_ == ActionSpaceKind::Tetris) {
    const Placement p = *tentative_;
    for (int s = p.start; s < p.start + current_beam().bw; ++s) t.at(c, p.group, s) = 1.0f;
    ++c;
  }
  if (repr_.lookahead) {
    const auto v = static_cast<float>(lookahead_value(k_));
    std::fill(t.data.begin() + static_cast<std::ptrdiff_t>(plane * c),
              t.data.begin() + static_cast<std::ptrdiff_t>(plane * (c + 1)), v);
  }
  return t;
}

StepResult EpisodeState::step(const Action& a, RewardKind reward_kind) {
  if (done()) throw StateError("step called on a finished episode");
  ++steps_;

  StepResult r;
  std::optional<Placement> to_finalize;

  if (space_ == ActionSpaceKind::Grid) {
    const auto* cell = std::get_if<GridCell>(&a);
    if (!cell) throw ContractError("GRID episode received a TETRIS action");
    if (cell->group < 0 || cell->group >= n_fg() || cell->start < 0 || cell->start >= n_fs()) {
      throw ContractError("GRID action outside the grid");
    }
    to_finalize = Placement{cell->group, std::min(cell->start, n_fs() - current_beam().bw)};
  } else {
    const auto* move = std::get_if<TetrisMove>(&a);
    if (!move) throw ContractError("TETRIS episode received a GRID action");
    TetrisMove m = *move;
    if (m != TetrisMove::New && move_cap_ > 0 && moves_on_beam_ >= move_cap_) m = TetrisMove::New;
    if (m == TetrisMove::New) {
      to_finalize = *tentative_;
    } else {
      Placement p = *tentative_;
      switch (m) {
        case TetrisMove::Up: --p.group; break;
        case TetrisMove::Down: ++p.group; break;
        case TetrisMove::Left: --p.start; break;
        case TetrisMove::Right: ++p.start; break;
        case TetrisMove::New: break;
      }
      tentative_ = clamp(p, current_beam().bw);
      ++moves_on_beam_;
      r.reward = -1.0 / (static_cast<double>(n_fg()) * n_fs());
      r.successful = successful_;
      return r;
    }
  }

  const int before = successful_;
  finalize(*to_finalize);
  r.assigned = true;
  r.done = done();
  r.successful = successful_;

  if (space_ == ActionSpaceKind::Tetris) {
    tentative_.reset();
    if (!r.done) tentative_ = random_placement(current_beam().bw, rng_);
  }

  std::optional<double> mc;
  if (reward_kind == RewardKind::MonteCarlo && !r.done) {
    mc = static_cast<double>(mc_rollout(rng_()));
  }
  r.reward = assignment_reward(reward_kind, before, successful_, r.done, mc);
  return r;
}

int EpisodeState::mc_rollout(std::uint64_t seed) const {
  if (done()) return successful_;
  EpisodeState copy = *this;
  copy.tentative_.reset();
  std::mt19937_64 rng(seed);
  while (!copy.done()) copy.finalize(copy.random_placement(copy.current_beam().bw, rng));
  return copy.successful_;
}

std::vector<PlanEntry> EpisodeState::export_plan() const {
  std::vector<PlanEntry> plan;
  plan.reserve(static_cast<std::size_t>(k_));
  for (int i = 0; i < k_; ++i) {
    const auto u = static_cast<std::size_t>(i);
    plan.push_back({beams_[u].id, placements_[u].group, placements_[u].start, beams_[u].bw,
                    conflicts_[u] == 0});
  }
  return plan;
}

}  // namespace fpd
