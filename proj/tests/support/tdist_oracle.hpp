#pragma once

// Reference two-sided tail probability for Student's t, computed by a
// different route than the library (adaptive Simpson quadrature instead of
// the continued fraction), so the two can cross-check each other.
//
// With x = sqrt(nu) tan(theta) the density integrates to
//   P(T >= t) = C(nu) * sqrt(nu) * Int_{atan(t/sqrt(nu))}^{pi/2} cos(theta)^(nu-1) dtheta,
// a smooth bounded integrand on a finite interval.

#include <cmath>
#include <functional>

namespace oracle {

inline double simpson(const std::function<double(double)>& f, double a,
                      double b, double fa, double fm, double fb, double eps,
                      int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * eps) {
    return left + right + delta / 15.0;
  }
  return simpson(f, a, m, fa, flm, fm, eps * 0.5, depth - 1) +
         simpson(f, m, b, fm, frm, fb, eps * 0.5, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double eps = 1e-13) {
  const double m = 0.5 * (a + b);
  return simpson(f, a, b, f(a), f(m), f(b), eps, 60);
}

/// P(|T| >= |t|) for T ~ Student-t with nu degrees of freedom.
inline double t_two_sided_p(double t, double nu) {
  const double at = std::fabs(t);
  if (at == 0.0) return 1.0;
  const double log_c = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                       0.5 * std::log(nu * M_PI);
  const double c = std::exp(log_c) * std::sqrt(nu);
  const double theta0 = std::atan(at / std::sqrt(nu));
  const double tail = integrate(
      [nu](double theta) { return std::pow(std::cos(theta), nu - 1.0); },
      theta0, M_PI_2);
  return 2.0 * c * tail;
}

}  // namespace oracle
