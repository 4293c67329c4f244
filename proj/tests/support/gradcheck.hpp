#pragma once

// Central finite-difference checks for the hand-written backward passes, in
// double precision. Each check draws random shapes and inputs from `rng`,
// forms the scalar L = sum(w * y) with random w, and compares the analytic
// gradient of L against (L(x + h) - L(x - h)) / 2h for every input element.

#include <random>
#include <string>

namespace fpd::gradcheck {

struct Result {
  double max_rel_error = 0.0;
  std::string where;  // worst element, for diagnostics
};

inline constexpr double kTolerance = 1e-3;

Result conv2d(std::mt19937_64& rng);
Result dense(std::mt19937_64& rng);
Result relu(std::mt19937_64& rng);
Result layer_norm(std::mt19937_64& rng);
Result lstm_segment(std::mt19937_64& rng);
Result policy(std::mt19937_64& rng, bool lstm_head);

}  // namespace fpd::gradcheck
