#include "fpd/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "fpd/error.hpp"
#include "json.hpp"

namespace fpd {

BeamPair make_pair_canonical(int a, int b) { return a < b ? BeamPair{a, b} : BeamPair{b, a}; }

void ConstraintSet::add_intra(int a, int b) { intra.insert(make_pair_canonical(a, b)); }

void ConstraintSet::add_inter(int a, int b) { inter.insert(make_pair_canonical(a, b)); }

void Scenario::validate() const {
  if (n_fg < 1 || n_fs < 1) {
    throw ValidationError("grid must be at least 1x1 (n_fg=" + std::to_string(n_fg) +
                          ", n_fs=" + std::to_string(n_fs) + ")");
  }
  if (n_fg % 2 != 0) {
    throw ValidationError("n_fg must be even (two polarizations per reuse), got " +
                          std::to_string(n_fg));
  }
  std::unordered_set<int> ids;
  for (const Beam& b : beams) {
    if (!ids.insert(b.id).second) {
      throw ValidationError("duplicate beam id " + std::to_string(b.id));
    }
    if (b.bw < 1) {
      throw ValidationError("beam " + std::to_string(b.id) + " has bw < 1");
    }
    if (b.bw > n_fs) {
      throw ValidationError("beam " + std::to_string(b.id) + " has bw " + std::to_string(b.bw) +
                            " > n_fs " + std::to_string(n_fs));
    }
  }
  auto check_pairs = [&](const std::set<BeamPair>& pairs, const char* kind) {
    for (const auto& [a, b] : pairs) {
      if (a == b) {
        throw ValidationError(std::string(kind) + " self-pair on beam " + std::to_string(a));
      }
      if (a > b) {
        throw ValidationError(std::string(kind) + " pair not canonical");
      }
      for (int id : {a, b}) {
        if (!ids.contains(id)) {
          throw ValidationError(std::string(kind) + " pair references unknown beam id " +
                                std::to_string(id));
        }
      }
    }
  };
  check_pairs(constraints.intra, "intra");
  check_pairs(constraints.inter, "inter");
}

void GenConfig::validate() const {
  if (n_beams < 0) throw ConfigError("n_beams must be >= 0");
  if (n_sats < 1) throw ConfigError("n_sats must be >= 1");
  if (bw_min < 1 || bw_min > bw_max) {
    throw ConfigError("bandwidth range must satisfy 1 <= bw_min <= bw_max");
  }
  if (!(r_inter >= 0.0) || !(r_intra >= 0.0)) throw ConfigError("radii must be >= 0");
}

std::vector<Beam> generate_pool(const GenConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> bw_dist(cfg.bw_min, cfg.bw_max);

  std::vector<Beam> pool;
  pool.reserve(static_cast<std::size_t>(cfg.n_beams));
  for (int i = 0; i < cfg.n_beams; ++i) {
    Beam b;
    b.id = i;
    b.pos[0] = unit(rng);
    b.pos[1] = unit(rng);
    b.bw = bw_dist(rng);
    b.sat = std::min(static_cast<int>(std::floor(b.pos[0] * cfg.n_sats)), cfg.n_sats - 1);
    pool.push_back(b);
  }
  return pool;
}

namespace {

double distance(const Beam& a, const Beam& b) {
  return std::hypot(a.pos[0] - b.pos[0], a.pos[1] - b.pos[1]);
}

}  // namespace

ConstraintSet generate_constraints(const std::vector<Beam>& beams, const GenConfig& cfg) {
  if (beams.empty()) throw ContractError("generate_constraints needs a non-empty beam list");
  cfg.validate();

  ConstraintSet out;
  const double reach = std::max(cfg.r_inter, cfg.r_intra);
  if (reach <= 0.0) return out;

  // Bucket beams on a uniform grid with cell size >= reach so only the
  // 3x3 neighbourhood of a cell can hold candidates.
  const int cells = std::max(1, std::min(1024, static_cast<int>(1.0 / reach)));
  auto cell_of = [cells](double v) {
    return std::clamp(static_cast<int>(v * cells), 0, cells - 1);
  };
  std::unordered_map<long, std::vector<std::size_t>> buckets;
  for (std::size_t i = 0; i < beams.size(); ++i) {
    long key = static_cast<long>(cell_of(beams[i].pos[0])) * cells + cell_of(beams[i].pos[1]);
    buckets[key].push_back(i);
  }

  for (std::size_t i = 0; i < beams.size(); ++i) {
    const Beam& a = beams[i];
    const int cx = cell_of(a.pos[0]);
    const int cy = cell_of(a.pos[1]);
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        const int nx = cx + dx;
        const int ny = cy + dy;
        if (nx < 0 || ny < 0 || nx >= cells || ny >= cells) continue;
        auto it = buckets.find(static_cast<long>(nx) * cells + ny);
        if (it == buckets.end()) continue;
        for (std::size_t j : it->second) {
          if (j <= i) continue;
          const Beam& b = beams[j];
          const double d = distance(a, b);
          if (d < cfg.r_inter) out.add_inter(a.id, b.id);
          if (a.sat == b.sat && d < cfg.r_intra) out.add_intra(a.id, b.id);
        }
      }
    }
  }
  return out;
}

Scenario generate_scenario(const GenConfig& cfg, int n_fg, int n_fs) {
  Scenario s;
  s.n_fg = n_fg;
  s.n_fs = n_fs;
  s.beams = generate_pool(cfg);
  if (!s.beams.empty()) s.constraints = generate_constraints(s.beams, cfg);
  std::ostringstream meta;
  meta << "synthetic: n_beams=" << cfg.n_beams << " n_sats=" << cfg.n_sats << " bw=[" << cfg.bw_min
       << "," << cfg.bw_max << "] r_inter=" << cfg.r_inter << " r_intra=" << cfg.r_intra
       << " seed=" << cfg.seed;
  s.meta = meta.str();
  s.validate();
  return s;
}

PoolSplit split_pool(const std::vector<Beam>& pool, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test_fraction must lie strictly between 0 and 1");
  }
  std::vector<Beam> shuffled = pool;
  std::mt19937_64 rng(seed);
  for (std::size_t i = shuffled.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(shuffled[i - 1], shuffled[pick(rng)]);
  }
  const auto n_test =
      static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(pool.size())));

  PoolSplit split;
  split.test.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_test));
  split.train.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(n_test), shuffled.end());
  auto by_id = [](const Beam& a, const Beam& b) { return a.id < b.id; };
  std::sort(split.test.begin(), split.test.end(), by_id);
  std::sort(split.train.begin(), split.train.end(), by_id);
  return split;
}

std::vector<Beam> sample_episode(const std::vector<Beam>& pool, int n, std::uint64_t seed) {
  if (n < 0 || static_cast<std::size_t>(n) > pool.size()) {
    throw InstanceError("cannot sample " + std::to_string(n) + " beams from a pool of " +
                        std::to_string(pool.size()));
  }
  // Partial Fisher-Yates over an index permutation.
  std::vector<std::size_t> idx(pool.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  std::vector<Beam> out;
  out.reserve(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
    out.push_back(pool[idx[i]]);
  }
  return out;
}

std::vector<Beam> scale_bandwidth(const std::vector<Beam>& pool, double factor, int cap) {
  if (!(factor >= 1.0)) throw ConfigError("bandwidth scale factor must be >= 1");
  if (cap < 1) throw ConfigError("bandwidth cap must be >= 1");
  std::vector<Beam> out = pool;
  for (Beam& b : out) {
    const long scaled = std::lround(static_cast<double>(b.bw) * factor);
    b.bw = static_cast<int>(std::min<long>(scaled, cap));
  }
  return out;
}

// --- serialization ---------------------------------------------------------

namespace {

using ojson = nlohmann::ordered_json;

ojson pairs_to_json(const std::set<BeamPair>& pairs) {
  ojson arr = ojson::array();
  for (const auto& [a, b] : pairs) arr.push_back({a, b});
  return arr;
}

template <typename T>
T field(const ojson& j, const std::string& key, const std::string& where) {
  const std::string name = where.empty() ? key : where + "." + key;
  if (!j.is_object() || !j.contains(key)) throw ParseError("missing field '" + name + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bad field '" + name + "': " + e.what());
  }
}

std::set<BeamPair> pairs_from_json(const ojson& j, const std::string& key) {
  if (!j.contains(key)) throw ParseError("missing field '" + key + "'");
  const ojson& arr = j.at(key);
  if (!arr.is_array()) throw ParseError("field '" + key + "' must be an array");
  std::set<BeamPair> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const ojson& p = arr[i];
    const std::string name = key + "[" + std::to_string(i) + "]";
    if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer()) {
      throw ParseError("field '" + name + "' must be a pair of integers");
    }
    const int a = p[0].get<int>();
    const int b = p[1].get<int>();
    if (a == b) throw ValidationError(name + " is a self-pair on beam " + std::to_string(a));
    out.insert(make_pair_canonical(a, b));
  }
  return out;
}

}  // namespace

std::string scenario_to_json(const Scenario& s) {
  std::vector<Beam> beams = s.beams;
  std::sort(beams.begin(), beams.end(), [](const Beam& a, const Beam& b) { return a.id < b.id; });

  ojson j;
  j["n_fg"] = s.n_fg;
  j["n_fs"] = s.n_fs;
  ojson arr = ojson::array();
  for (const Beam& b : beams) {
    ojson jb;
    jb["id"] = b.id;
    jb["bw"] = b.bw;
    jb["pos"] = {b.pos[0], b.pos[1]};
    jb["sat"] = b.sat;
    arr.push_back(std::move(jb));
  }
  j["beams"] = std::move(arr);
  j["intra"] = pairs_to_json(s.constraints.intra);
  j["inter"] = pairs_to_json(s.constraints.inter);
  j["meta"] = s.meta;
  return j.dump() + "\n";
}

Scenario scenario_from_json(const std::string& text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("scenario root must be an object");

  Scenario s;
  s.n_fg = field<int>(j, "n_fg", "");
  s.n_fs = field<int>(j, "n_fs", "");
  if (!j.contains("beams") || !j.at("beams").is_array()) {
    throw ParseError("missing or non-array field 'beams'");
  }
  const ojson& arr = j.at("beams");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string where = "beams[" + std::to_string(i) + "]";
    const ojson& jb = arr[i];
    Beam b;
    b.id = field<int>(jb, "id", where);
    b.bw = field<int>(jb, "bw", where);
    auto pos = field<std::vector<double>>(jb, "pos", where);
    if (pos.size() != 2) throw ParseError("field '" + where + ".pos' must have two entries");
    b.pos = {pos[0], pos[1]};
    b.sat = field<int>(jb, "sat", where);
    s.beams.push_back(b);
  }
  std::sort(s.beams.begin(), s.beams.end(), [](const Beam& a, const Beam& b) { return a.id < b.id; });
  s.constraints.intra = pairs_from_json(j, "intra");
  s.constraints.inter = pairs_from_json(j, "inter");
  s.meta = j.contains("meta") ? field<std::string>(j, "meta", "") : std::string{};
  s.validate();
  return s;
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  s.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << scenario_to_json(s);
  if (!out) throw Error("failed writing " + path.string());
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(buf.str());
}

}  // namespace fpd
