#pragma once

#include <memory>
#include <vector>

#include "fpd/harness/evaluate.hpp"

namespace fpd::harness {

struct FactorReport {
  double factor = 1.0;
  EvalReport agent;
  EvalReport random;
};

// Evaluates the policy and the random baseline on the test pool with every
// bandwidth scaled by each factor (capped at `cap`). Factor 1 is the matched pool.
std::vector<FactorReport> nonstationarity_eval(const nn::PolicyNet<float>& policy,
                                               std::shared_ptr<const Scenario> scenario,
                                               const std::vector<Beam>& test_pool,
                                               const std::vector<double>& factors, int cap,
                                               const EvalOptions& opts);

}  // namespace fpd::harness
