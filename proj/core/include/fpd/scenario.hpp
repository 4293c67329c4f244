#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace fpd {

struct Beam {
  int id = 0;
  int bw = 1;  // frequency slots demanded
  std::array<double, 2> pos{0.0, 0.0};
  int sat = 0;  // serving-satellite band

  friend bool operator==(const Beam&, const Beam&) = default;
};

// Unordered beam-id pair, stored canonically as (min, max).
using BeamPair = std::pair<int, int>;

BeamPair make_pair_canonical(int a, int b);

struct ConstraintSet {
  std::set<BeamPair> intra;
  std::set<BeamPair> inter;

  void add_intra(int a, int b);
  void add_inter(int a, int b);

  friend bool operator==(const ConstraintSet&, const ConstraintSet&) = default;
};

struct Scenario {
  int n_fg = 4;
  int n_fs = 20;
  std::vector<Beam> beams;
  ConstraintSet constraints;
  std::string meta;

  // Throws ValidationError naming the broken invariant.
  void validate() const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct GenConfig {
  int n_beams = 5000;
  int n_sats = 7;
  int bw_min = 1;
  int bw_max = 8;
  double r_inter = 0.035;
  double r_intra = 0.07;
  std::uint64_t seed = 1;

  void validate() const;
};

std::vector<Beam> generate_pool(const GenConfig& cfg);

// Inter pairs: distance < r_inter. Intra pairs: same satellite band and distance < r_intra.
ConstraintSet generate_constraints(const std::vector<Beam>& beams, const GenConfig& cfg);

// Pool plus constraints on an n_fg x n_fs grid, with provenance recorded in meta.
Scenario generate_scenario(const GenConfig& cfg, int n_fg, int n_fs);

struct PoolSplit {
  std::vector<Beam> train;
  std::vector<Beam> test;
};

// |test| = round(test_fraction * |pool|); both halves sorted by id.
PoolSplit split_pool(const std::vector<Beam>& pool, double test_fraction, std::uint64_t seed);

// n distinct beams drawn without replacement; the returned order is the assignment order.
std::vector<Beam> sample_episode(const std::vector<Beam>& pool, int n, std::uint64_t seed);

// bw' = min(round(bw * factor), cap), rounding half away from zero.
std::vector<Beam> scale_bandwidth(const std::vector<Beam>& pool, double factor, int cap);

std::string scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const std::string& text);
void save_scenario(const Scenario& s, const std::filesystem::path& path);
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace fpd
