#include "sradam/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sradam {

namespace {

// Continued fraction for the incomplete beta, modified Lentz iteration.
// Converges quickly for x < (a+1)/(a+b+2).
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
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
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw std::runtime_error("regularized_incomplete_beta: did not converge");
}

}  // namespace

double mean(std::span<const double> xs) {
  if (xs.empty()) {
    throw std::invalid_argument("mean: empty input");
  }
  double acc = 0.0;
  for (double x : xs) acc += x;
  return acc / static_cast<double>(xs.size());
}

double sample_std(std::span<const double> xs) {
  if (xs.size() < 2) {
    throw std::invalid_argument("sample_std: need at least 2 values");
  }
  const double mu = mean(xs);
  double acc = 0.0;
  for (double x : xs) {
    const double d = x - mu;
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

double std_error(std::span<const double> xs) {
  return sample_std(xs) / std::sqrt(static_cast<double>(xs.size()));
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::invalid_argument("regularized_incomplete_beta: a, b must be positive");
  }
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::invalid_argument("regularized_incomplete_beta: x outside [0, 1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;

  const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log1p(-x);
  const double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return bt * beta_cf(a, b, x) / a;
  }
  return 1.0 - bt * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double dof) {
  if (!(dof > 0.0)) {
    throw std::invalid_argument("student_t_two_sided_p: dof must be positive");
  }
  if (std::isinf(t)) return 0.0;
  if (!std::isfinite(t)) {
    throw std::invalid_argument("student_t_two_sided_p: t is NaN");
  }
  const double x = dof / (dof + t * t);
  return regularized_incomplete_beta(0.5 * dof, 0.5, x);
}

double student_t_cdf(double t, double dof) {
  const double p = student_t_two_sided_p(t, dof);
  return t >= 0.0 ? 1.0 - 0.5 * p : 0.5 * p;
}

TTestResult paired_ttest(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("paired_ttest: length mismatch");
  }
  if (a.size() < 2) {
    throw std::invalid_argument("paired_ttest: need at least 2 pairs");
  }
  const std::size_t n = a.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = b[i] - a[i];

  TTestResult res;
  res.n = n;
  res.mean_diff = mean(d);
  const double sd = sample_std(d);
  if (sd == 0.0) {
    res.degenerate = true;
    if (res.mean_diff == 0.0) {
      res.t = 0.0;
      res.p = 1.0;
    } else {
      res.t = res.mean_diff > 0.0 ? std::numeric_limits<double>::infinity()
                                  : -std::numeric_limits<double>::infinity();
      res.p = 0.0;
    }
    return res;
  }
  res.t = res.mean_diff / (sd / std::sqrt(static_cast<double>(n)));
  res.p = student_t_two_sided_p(res.t, static_cast<double>(n - 1));
  return res;
}

}  // namespace sradam
