#pragma once

#include <span>

namespace fpd::harness {

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;           // two-sided
  bool degenerate = false;  // both samples have zero variance
};

double sample_mean(std::span<const double> xs);
double sample_variance(std::span<const double> xs);  // n - 1 denominator

// Welch's unequal-variance two-sided t-test. With zero variance in both
// samples the result is flagged degenerate: p = 1 for equal means, else 0.
WelchResult welch_t_test(std::span<const double> xs, std::span<const double> ys);

}  // namespace fpd::harness
