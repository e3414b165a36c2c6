#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sradam {

/// Arithmetic mean; empty input is an error.
double mean(std::span<const double> xs);

/// Sample standard deviation with the n-1 divisor; needs at least 2 values.
double sample_std(std::span<const double> xs);

/// Standard error of the mean: sample_std / sqrt(n).
double std_error(std::span<const double> xs);

/// Regularized incomplete beta I_x(a, b), evaluated with the continued
/// fraction (modified Lentz), using the symmetry I_x(a,b) = 1 - I_{1-x}(b,a)
/// to stay in the fast-converging region. a, b > 0; x in [0, 1].
double regularized_incomplete_beta(double a, double b, double x);

/// Lower-tail CDF of Student's t with dof degrees of freedom.
double student_t_cdf(double t, double dof);

/// Two-sided tail probability: P(|T| >= |t|) = I_{dof/(dof+t^2)}(dof/2, 1/2).
double student_t_two_sided_p(double t, double dof);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  double mean_diff = 0.0;  ///< mean of b - a
  std::size_t n = 0;
  bool degenerate = false;  ///< all differences equal; t/p not meaningful
};

/// Paired two-sided t-test on b - a. Requires equal lengths and n >= 2.
/// A zero-variance difference vector flags degenerate instead of dividing
/// by zero (t = 0 and p = 1 when the shared difference is 0, else t = +/-inf,
/// p = 0).
TTestResult paired_ttest(std::span<const double> a, std::span<const double> b);

}  // namespace sradam
