#pragma once

#include <string>
#include <vector>

#include "fpd/environment.hpp"

namespace fpd::cli {

inline constexpr const char* kUnsuccessfulFill = "#DAA520";

// n_fg x n_fs lattice, one rectangle per occupied cell. Success is recomputed
// from the scenario first; unsuccessful beams are gold, successful beams
// take a palette colour chosen by beam id.
std::string render_plan_svg(const std::vector<PlanEntry>& plan, const Scenario& scenario);

}  // namespace fpd::cli
