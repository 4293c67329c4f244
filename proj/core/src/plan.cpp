#include "fpd/plan.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>

#include "fpd/error.hpp"
#include "json.hpp"

namespace fpd {

using ojson = nlohmann::ordered_json;

std::string plan_to_json(const std::vector<PlanEntry>& plan) {
  ojson arr = ojson::array();
  for (const PlanEntry& e : plan) {
    ojson j;
    j["beam_id"] = e.beam_id;
    j["group"] = e.group;
    j["start"] = e.start;
    j["bw"] = e.bw;
    j["successful"] = e.successful;
    arr.push_back(std::move(j));
  }
  return arr.dump(1) + "\n";
}

std::vector<PlanEntry> plan_from_json(const std::string& text) {
  ojson arr;
  try {
    arr = ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("plan is not valid JSON: ") + e.what());
  }
  if (!arr.is_array()) throw ParseError("plan root must be an array");
  std::vector<PlanEntry> plan;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string where = "[" + std::to_string(i) + "]";
    const ojson& j = arr[i];
    auto get_int = [&](const char* key) {
      if (!j.is_object() || !j.contains(key) || !j.at(key).is_number_integer()) {
        throw ParseError("bad or missing field '" + where + "." + key + "'");
      }
      return j.at(key).get<int>();
    };
    PlanEntry e;
    e.beam_id = get_int("beam_id");
    e.group = get_int("group");
    e.start = get_int("start");
    e.bw = get_int("bw");
    if (!j.contains("successful") || !j.at("successful").is_boolean()) {
      throw ParseError("bad or missing field '" + where + ".successful'");
    }
    e.successful = j.at("successful").get<bool>();
    plan.push_back(e);
  }
  return plan;
}

void save_plan(const std::vector<PlanEntry>& plan, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << plan_to_json(plan);
}

std::vector<PlanEntry> load_plan(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open plan file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return plan_from_json(buf.str());
}

std::vector<PlanEntry> recheck_plan(const std::vector<PlanEntry>& plan, const Scenario& scenario) {
  std::unordered_map<int, std::size_t> index;
  std::unordered_map<int, int> known;
  for (const Beam& b : scenario.beams) known.emplace(b.id, b.bw);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const PlanEntry& e = plan[i];
    if (!known.contains(e.beam_id)) {
      throw ValidationError("plan references beam " + std::to_string(e.beam_id) +
                            " which is not in the scenario");
    }
    if (e.bw < 1 || e.group < 0 || e.group >= scenario.n_fg || e.start < 0 ||
        e.start + e.bw > scenario.n_fs) {
      throw ValidationError("plan entry for beam " + std::to_string(e.beam_id) +
                            " does not fit the " + std::to_string(scenario.n_fg) + "x" +
                            std::to_string(scenario.n_fs) + " grid");
    }
    if (!index.emplace(e.beam_id, i).second) {
      throw ValidationError("beam " + std::to_string(e.beam_id) + " placed twice");
    }
  }

  std::vector<PlanEntry> out = plan;
  for (PlanEntry& e : out) e.successful = true;
  auto apply = [&](const std::set<BeamPair>& pairs, ConstraintKind kind) {
    for (const auto& [a, b] : pairs) {
      auto ia = index.find(a);
      auto ib = index.find(b);
      if (ia == index.end() || ib == index.end()) continue;
      PlanEntry& x = out[ia->second];
      PlanEntry& y = out[ib->second];
      if (violates({x.group, x.start}, x.bw, {y.group, y.start}, y.bw, kind)) {
        x.successful = false;
        y.successful = false;
      }
    }
  };
  apply(scenario.constraints.intra, ConstraintKind::Intra);
  apply(scenario.constraints.inter, ConstraintKind::Inter);
  return out;
}

}  // namespace fpd
