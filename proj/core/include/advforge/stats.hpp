#pragma once

#include <cstddef>
#include <span>

namespace advforge {

struct StatSummary {
  std::size_t n = 0;
  double mean = 0;
  double sample_std = 0;  // divisor n - 1
};

/// Mean and sample standard deviation. Throws InvariantError for n < 2.
StatSummary describe(std::span<const double> xs);

struct TTestResult {
  double t = 0;
  double p_two_tailed = 0;
  std::size_t df = 0;
};

/// Dependent paired t-test on d = a - b: t = mean(d) / (sd(d)/sqrt(n)),
/// df = n - 1, two-tailed p. Throws InvariantError on length mismatch or
/// n < 2, ZeroVariance when every difference is identical.
TTestResult paired_ttest(std::span<const double> a, std::span<const double> b);

/// Regularized incomplete beta I_x(a,b) via Lentz's continued fraction,
/// relative accuracy 1e-10. Requires a, b > 0 and x in [0, 1].
double regularized_incomplete_beta(double a, double b, double x);

/// Two-tailed Student-t p-value: I_{df/(df+t^2)}(df/2, 1/2).
double student_t_two_tailed_p(double t, std::size_t df);

}  // namespace advforge
