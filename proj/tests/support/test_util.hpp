#pragma once

#include <cstdlib>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "fpd/environment.hpp"
#include "fpd/scenario.hpp"

namespace fpd::support {

inline std::filesystem::path temp_dir(const std::string& name) {
  const char* root = std::getenv("FPD_TEST_TMP");
  std::filesystem::path dir = root ? std::filesystem::path(root) : std::filesystem::temp_directory_path() / "fpd_tests";
  dir /= name;
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::shared_ptr<const Scenario> make_scenario(int n_fg, int n_fs, std::vector<Beam> beams,
                                                     std::vector<BeamPair> intra = {},
                                                     std::vector<BeamPair> inter = {}) {
  auto s = std::make_shared<Scenario>();
  s->n_fg = n_fg;
  s->n_fs = n_fs;
  s->beams = std::move(beams);
  for (auto [a, b] : intra) s->constraints.add_intra(a, b);
  for (auto [a, b] : inter) s->constraints.add_inter(a, b);
  s->validate();
  return s;
}

// n beams with ids 0..n-1, random bandwidths, and each pair constrained with
// probability p_intra / p_inter.
inline std::shared_ptr<const Scenario> random_scenario(std::mt19937_64& rng, int n, int n_fg, int n_fs,
                                                       double p_intra, double p_inter, int bw_max = 0) {
  if (bw_max <= 0) bw_max = std::max(1, n_fs / 2);
  std::uniform_int_distribution<int> bw(1, bw_max);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Beam> beams;
  for (int i = 0; i < n; ++i) beams.push_back(Beam{i, bw(rng), {u(rng), u(rng)}, 0});
  std::vector<BeamPair> intra, inter;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (u(rng) < p_intra) intra.push_back({i, j});
      if (u(rng) < p_inter) inter.push_back({i, j});
    }
  }
  return make_scenario(n_fg, n_fs, std::move(beams), intra, inter);
}

inline Action random_env_action(const EpisodeState& st, std::mt19937_64& rng) {
  if (st.space() == ActionSpaceKind::Grid) {
    return GridCell{std::uniform_int_distribution<int>(0, st.n_fg() - 1)(rng),
                    std::uniform_int_distribution<int>(0, st.n_fs() - 1)(rng)};
  }
  return static_cast<TetrisMove>(std::uniform_int_distribution<int>(0, kTetrisActions - 1)(rng));
}

}  // namespace fpd::support
