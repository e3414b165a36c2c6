#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "sradam/stats.hpp"
#include "support/tdist_oracle.hpp"

using namespace sradam;

TEST_CASE("mean, sample std, std error") {
  std::vector<double> xs{2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0};
  CHECK(mean(xs) == doctest::Approx(5.0));
  // Sum of squared deviations = 32, n-1 = 7.
  CHECK(sample_std(xs) == doctest::Approx(std::sqrt(32.0 / 7.0)));
  CHECK(std_error(xs) == doctest::Approx(std::sqrt(32.0 / 7.0 / 8.0)));
  CHECK_THROWS_AS(mean(std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(sample_std(std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("incomplete beta endpoints and symmetry") {
  CHECK(regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0);
  // I_x(1,1) = x.
  CHECK(regularized_incomplete_beta(1.0, 1.0, 0.37) == doctest::Approx(0.37));
  // Symmetry: I_x(a,b) + I_{1-x}(b,a) = 1.
  const double x = 0.42;
  CHECK(regularized_incomplete_beta(2.5, 4.0, x) +
            regularized_incomplete_beta(4.0, 2.5, 1.0 - x) ==
        doctest::Approx(1.0).epsilon(1e-12));
  // I_x(1,b) = 1 - (1-x)^b in closed form.
  CHECK(regularized_incomplete_beta(1.0, 5.0, 0.2) ==
        doctest::Approx(1.0 - std::pow(0.8, 5.0)).epsilon(1e-12));
  CHECK_THROWS_AS(regularized_incomplete_beta(0.0, 1.0, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(regularized_incomplete_beta(1.0, 1.0, 1.5),
                  std::invalid_argument);
}

TEST_CASE("t distribution closed forms at dof 1 and 2") {
  // dof=1 is Cauchy: F(t) = 1/2 + atan(t)/pi.
  for (double t : {-3.0, -1.0, 0.0, 0.5, 2.0, 10.0}) {
    const double cauchy = 0.5 + std::atan(t) / M_PI;
    CHECK(student_t_cdf(t, 1.0) == doctest::Approx(cauchy).epsilon(1e-12));
  }
  // dof=2: F(t) = 1/2 + t / (2 sqrt(2 + t^2)).
  for (double t : {-2.0, -0.3, 0.0, 1.0, 4.0}) {
    const double ref = 0.5 + t / (2.0 * std::sqrt(2.0 + t * t));
    CHECK(student_t_cdf(t, 2.0) == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("two-sided p agrees with an independent quadrature") {
  const double ts[] = {0.1, 0.5, 1.0, 1.5, 2.0, 2.5, 3.2, 4.0, 6.0};
  const double dofs[] = {1.0, 2.0, 3.0, 4.0, 7.0, 10.0, 30.0};
  for (double dof : dofs) {
    for (double t : ts) {
      const double lib = student_t_two_sided_p(t, dof);
      const double ref = oracle::t_two_sided_p(t, dof);
      CHECK(std::fabs(lib - ref) < 1e-10);
      // Symmetric in t.
      CHECK(student_t_two_sided_p(-t, dof) == lib);
    }
  }
  CHECK(student_t_two_sided_p(0.0, 5.0) == doctest::Approx(1.0));
  CHECK(student_t_two_sided_p(std::numeric_limits<double>::infinity(), 5.0) ==
        0.0);
}

TEST_CASE("paired t-test worked example") {
  // d = b - a = {1,2,3,4,5}: mean 3, sd sqrt(2.5), t = 3/sqrt(0.5).
  std::vector<double> a{0.0, 0.0, 0.0, 0.0, 0.0};
  std::vector<double> b{1.0, 2.0, 3.0, 4.0, 5.0};
  auto r = paired_ttest(a, b);
  CHECK(r.n == 5);
  CHECK(r.mean_diff == doctest::Approx(3.0));
  CHECK(r.t == doctest::Approx(3.0 / std::sqrt(0.5)).epsilon(1e-12));
  // Reference p from the quadrature oracle at dof = 4.
  const double ref_p = oracle::t_two_sided_p(r.t, 4.0);
  CHECK(r.p == doctest::Approx(ref_p).epsilon(1e-9));
  CHECK(r.p == doctest::Approx(0.013236).epsilon(1e-3));
  CHECK_FALSE(r.degenerate);
}

TEST_CASE("paired t-test degenerate branches") {
  std::vector<double> a{1.0, 2.0, 3.0};
  auto same = paired_ttest(a, a);
  CHECK(same.degenerate);
  CHECK(same.t == 0.0);
  CHECK(same.p == 1.0);

  std::vector<double> b{2.0, 3.0, 4.0};  // constant shift of +1
  auto shift = paired_ttest(a, b);
  CHECK(shift.degenerate);
  CHECK(std::isinf(shift.t));
  CHECK(shift.t > 0.0);
  CHECK(shift.p == 0.0);

  std::vector<double> short_b{1.0};
  CHECK_THROWS_AS(paired_ttest(a, short_b), std::invalid_argument);
}

TEST_CASE("p-values are monotone in |t|") {
  double prev = 1.0;
  for (double t = 0.25; t < 8.0; t += 0.25) {
    const double p = student_t_two_sided_p(t, 6.0);
    CHECK(p < prev);
    prev = p;
  }
}
