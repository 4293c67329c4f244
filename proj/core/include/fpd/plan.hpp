#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fpd/environment.hpp"

namespace fpd {

// JSON array of {beam_id, group, start, bw, successful}.
std::string plan_to_json(const std::vector<PlanEntry>& plan);
std::vector<PlanEntry> plan_from_json(const std::string& text);
void save_plan(const std::vector<PlanEntry>& plan, const std::filesystem::path& path);
std::vector<PlanEntry> load_plan(const std::filesystem::path& path);

// Recomputes every entry's `successful` flag from the scenario's constraints.
// Throws ValidationError if the plan references unknown beams or leaves the grid.
std::vector<PlanEntry> recheck_plan(const std::vector<PlanEntry>& plan, const Scenario& scenario);

}  // namespace fpd
