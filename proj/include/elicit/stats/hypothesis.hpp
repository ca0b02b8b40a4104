#pragma once

#include <span>

namespace elicit::stats {

struct ShapiroWilk {
  double w = 0;
  double p = 0;
};

/// Royston's AS R94 approximation. Throws SampleTooSmall (n < 3),
/// InvalidParameter (n > 5000) or ZeroVariance.
ShapiroWilk shapiro_wilk(std::span<const double> sample);

struct TTest {
  double t = 0;
  int df = 0;
  double p = 0;  // two-tailed
};

/// Pooled-variance Student test. Throws SampleTooSmall or ZeroVariance.
TTest t_test_two_sample(std::span<const double> a, std::span<const double> b);

/// Power of the two-sided pooled t test with n per group.
double power_two_sample_at(double effect_size, int n_per_group, double alpha);

/// Smallest n per group reaching `power`. Throws InvalidParameter.
int power_two_sample(double effect_size, double power, double alpha);

}  // namespace elicit::stats
