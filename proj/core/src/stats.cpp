#include "advforge/stats.hpp"

#include <cmath>
#include <cstdlib>
#include <vector>

#include "advforge/errors.hpp"

namespace advforge {

namespace {

/// Continued-fraction tail of the incomplete beta (Lentz's method). Converges
/// quickly for x < (a+1)/(a+b+2); the caller flips to the mirrored argument
/// otherwise.
double beta_cf(double a, double b, double x) {
  constexpr double kEps = 1e-14;
  constexpr double kTiny = 1e-300;
  constexpr int kMaxIter = 500;

  double qab = a + b, qap = a + 1, qam = a - 1;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) return h;
  }
  throw DomainError("incomplete beta continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0) || !(b > 0)) throw DomainError("incomplete beta requires a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("incomplete beta requires x in [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  double ln_front = a * std::log(x) + b * std::log1p(-x) -
                    (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
  double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_tailed_p(double t, std::size_t df) {
  if (df < 1) throw DomainError("t distribution needs df >= 1");
  if (!std::isfinite(t)) throw DomainError("non-finite t statistic");
  if (t == 0.0) return 1.0;
  double v = double(df);
  double x = v / (v + t * t);
  double p = regularized_incomplete_beta(v / 2.0, 0.5, x);
  return std::min(1.0, std::max(0.0, p));
}

StatSummary describe(std::span<const double> xs) {
  if (xs.size() < 2) throw InvariantError("describe needs at least 2 values");
  StatSummary s;
  s.n = xs.size();
  double sum = 0;
  for (double x : xs) sum += x;
  s.mean = sum / double(s.n);
  double ss = 0;
  for (double x : xs) {
    double d = x - s.mean;
    ss += d * d;
  }
  s.sample_std = std::sqrt(ss / double(s.n - 1));
  return s;
}

TTestResult paired_ttest(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvariantError("paired_ttest needs equal-length samples");
  if (a.size() < 2) throw InvariantError("paired_ttest needs at least 2 pairs");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  bool all_same = true;
  for (double v : d)
    if (v != d[0]) {
      all_same = false;
      break;
    }
  if (all_same) throw ZeroVariance("all paired differences identical");

  StatSummary s = describe(d);
  TTestResult r;
  r.df = s.n - 1;
  r.t = s.mean / (s.sample_std / std::sqrt(double(s.n)));
  r.p_two_tailed = student_t_two_tailed_p(r.t, r.df);
  return r;
}

}  // namespace advforge
