#include "fpd/harness/nonstationarity.hpp"

#include "fpd/error.hpp"

namespace fpd::harness {

std::vector<FactorReport> nonstationarity_eval(const nn::PolicyNet<float>& policy,
                                               std::shared_ptr<const Scenario> scenario,
                                               const std::vector<Beam>& test_pool,
                                               const std::vector<double>& factors, int cap,
                                               const EvalOptions& opts) {
  if (!scenario) throw ContractError("non-stationarity evaluation needs a scenario");
  if (cap > scenario->n_fs) {
    throw ConfigError("bandwidth cap " + std::to_string(cap) + " exceeds the grid width " +
                      std::to_string(scenario->n_fs));
  }
  EvalOptions random_opts = opts;
  random_opts.space = policy.config().space;
  random_opts.lookahead = policy.config().lookahead;

  std::vector<FactorReport> out;
  for (double f : factors) {
    const std::vector<Beam> pool = scale_bandwidth(test_pool, f, cap);
    FactorReport r;
    r.factor = f;
    r.agent = evaluate(&policy, scenario, pool, opts);
    r.random = evaluate(nullptr, scenario, pool, random_opts);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace fpd::harness
