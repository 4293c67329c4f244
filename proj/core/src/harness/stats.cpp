#include "fpd/harness/stats.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <cmath>

#include "fpd/error.hpp"

namespace fpd::harness {

double sample_mean(std::span<const double> xs) {
  if (xs.empty()) throw ContractError("mean of an empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) throw ContractError("variance needs at least two samples");
  const double m = sample_mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

WelchResult welch_t_test(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() < 2 || ys.size() < 2) throw ContractError("Welch test needs at least two samples per side");
  const double nx = static_cast<double>(xs.size());
  const double ny = static_cast<double>(ys.size());
  const double mx = sample_mean(xs);
  const double my = sample_mean(ys);
  const double vx = sample_variance(xs) / nx;
  const double vy = sample_variance(ys) / ny;
  const double se2 = vx + vy;

  WelchResult r;
  if (se2 == 0.0) {
    r.degenerate = true;
    r.t = mx == my ? 0.0 : std::copysign(INFINITY, mx - my);
    r.df = nx + ny - 2.0;
    r.p = mx == my ? 1.0 : 0.0;
    return r;
  }
  r.t = (mx - my) / std::sqrt(se2);
  r.df = se2 * se2 / (vx * vx / (nx - 1.0) + vy * vy / (ny - 1.0));
  // P(|T| > |t|) = I_{df / (df + t^2)}(df / 2, 1 / 2)
  const double x = r.df / (r.df + r.t * r.t);
  r.p = boost::math::ibeta(r.df / 2.0, 0.5, x);
  return r;
}

}  // namespace fpd::harness
