#include "fpd/cli/svg.hpp"

#include <array>
#include <sstream>

#include "fpd/plan.hpp"

namespace fpd::cli {

namespace {

constexpr int kCell = 24;
constexpr int kMargin = 32;

constexpr std::array<const char*, 10> kPalette = {
    "#1F77B4", "#FF7F0E", "#2CA02C", "#D62728", "#9467BD",
    "#8C564B", "#E377C2", "#7F7F7F", "#17BECF", "#393B79",
};

}  // namespace

std::string render_plan_svg(const std::vector<PlanEntry>& plan, const Scenario& scenario) {
  const std::vector<PlanEntry> checked = recheck_plan(plan, scenario);
  const int w = scenario.n_fs * kCell;
  const int h = scenario.n_fg * kCell;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w + 2 * kMargin << "\" height=\""
      << h + 2 * kMargin << "\" viewBox=\"0 0 " << w + 2 * kMargin << ' ' << h + 2 * kMargin << "\">\n";
  svg << "<rect class=\"background\" x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << w
      << "\" height=\"" << h << "\" fill=\"#FFFFFF\"/>\n";

  for (const PlanEntry& e : checked) {
    const char* fill = e.successful ? kPalette[static_cast<std::size_t>(e.beam_id) % kPalette.size()]
                                    : kUnsuccessfulFill;
    for (const Cell& c : occupied_cells(Placement{e.group, e.start}, e.bw)) {
      svg << "<rect class=\"beam\" data-beam=\"" << e.beam_id << "\" x=\"" << kMargin + c.slot * kCell
          << "\" y=\"" << kMargin + c.group * kCell << "\" width=\"" << kCell << "\" height=\"" << kCell
          << "\" fill=\"" << fill << "\"/>\n";
    }
  }

  svg << "<g stroke=\"#404040\" stroke-width=\"1\">\n";
  for (int g = 0; g <= scenario.n_fg; ++g) {
    const int y = kMargin + g * kCell;
    svg << "<line x1=\"" << kMargin << "\" y1=\"" << y << "\" x2=\"" << kMargin + w << "\" y2=\"" << y << "\"/>\n";
  }
  for (int s = 0; s <= scenario.n_fs; ++s) {
    const int x = kMargin + s * kCell;
    svg << "<line x1=\"" << x << "\" y1=\"" << kMargin << "\" x2=\"" << x << "\" y2=\"" << kMargin + h << "\"/>\n";
  }
  svg << "</g>\n";

  svg << "<g font-family=\"sans-serif\" font-size=\"10\" fill=\"#000000\">\n";
  for (int g = 0; g < scenario.n_fg; ++g) {
    svg << "<text x=\"" << kMargin - 4 << "\" y=\"" << kMargin + g * kCell + kCell / 2 + 3
        << "\" text-anchor=\"end\">G" << g + 1 << "</text>\n";
  }
  svg << "<text x=\"" << kMargin + w / 2 << "\" y=\"" << kMargin + h + 20
      << "\" text-anchor=\"middle\">frequency slot</text>\n";
  svg << "</g>\n</svg>\n";
  return svg.str();
}

}  // namespace fpd::cli
