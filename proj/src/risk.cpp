#include "sradam/risk.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace sradam {

namespace {

std::string fmt_g(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

void check_risk_args(std::size_t p, double sigma2, std::size_t trials) {
  if (p < 3) {
    throw std::invalid_argument("estimate_risk: p must be >= 3");
  }
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw std::invalid_argument("estimate_risk: sigma2 must be positive");
  }
  if (trials == 0) {
    throw std::invalid_argument("estimate_risk: trials must be >= 1");
  }
}

}  // namespace

std::string estimator_label(EstimatorKind kind, double tau2) {
  switch (kind) {
    case EstimatorKind::UE: return "UE";
    case EstimatorKind::JS: return "JS";
    case EstimatorKind::JSPlus: return "JSPlus";
    case EstimatorKind::Bayes: return "Bayes(" + fmt_g(tau2) + ")";
  }
  return "UE";
}

RiskEstimate estimate_risk(EstimatorKind est, std::size_t p, double sigma2,
                           const ParamVector& mu, std::size_t trials, Rng& rng,
                           double tau2) {
  check_risk_args(p, sigma2, trials);
  if (mu.size() != p) {
    throw std::invalid_argument("estimate_risk: mu dimension mismatch");
  }
  if (est == EstimatorKind::Bayes && !(tau2 > 0.0)) {
    throw std::invalid_argument("estimate_risk: tau2 must be positive");
  }

  const double sigma = std::sqrt(sigma2);
  const double js_num = static_cast<double>(p - 2) * sigma2;
  const double bayes_c = tau2 / (tau2 + sigma2);

  std::vector<double> y(p);
  // Welford over per-trial squared errors.
  double err_mean = 0.0;
  double err_m2 = 0.0;

  for (std::size_t trial = 0; trial < trials; ++trial) {
    double y_sq = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      y[i] = mu[i] + sigma * rng.normal();
      y_sq += y[i] * y[i];
    }

    double c = 1.0;
    switch (est) {
      case EstimatorKind::UE:
        c = 1.0;
        break;
      case EstimatorKind::JS:
        // y at the exact origin has measure zero; send it to 0 rather than
        // divide by zero.
        c = y_sq > 0.0 ? 1.0 - js_num / y_sq : 0.0;
        break;
      case EstimatorKind::JSPlus:
        c = y_sq > 0.0 ? std::max(0.0, 1.0 - js_num / y_sq) : 0.0;
        break;
      case EstimatorKind::Bayes:
        c = bayes_c;
        break;
    }

    double err = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      const double d = c * y[i] - mu[i];
      err += d * d;
    }

    const double delta = err - err_mean;
    err_mean += delta / static_cast<double>(trial + 1);
    err_m2 += delta * (err - err_mean);
  }

  RiskEstimate out;
  out.estimator = est;
  out.tau2 = tau2;
  out.p = p;
  out.sigma2 = sigma2;
  out.mu_norm = std::sqrt(sq_norm(mu));
  out.trials = trials;
  out.mse = err_mean;
  out.std_err = trials >= 2 ? std::sqrt(err_m2 / static_cast<double>(trials - 1) /
                                        static_cast<double>(trials))
                            : 0.0;
  return out;
}

double bayes_risk_closed_form(std::size_t p, double tau2, double sigma2) {
  if (p == 0 || !(tau2 > 0.0) || !(sigma2 > 0.0)) {
    throw std::invalid_argument("bayes_risk_closed_form: bad arguments");
  }
  return static_cast<double>(p) * tau2 * sigma2 / (tau2 + sigma2);
}

ParamVector bayes_estimator(const ParamVector& y, double tau2, double sigma2) {
  if (!(tau2 > 0.0) || !(sigma2 > 0.0)) {
    throw std::invalid_argument("bayes_estimator: variances must be positive");
  }
  const double c = tau2 / (tau2 + sigma2);
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = c * y[i];
  return ParamVector(std::move(out));
}

RiskEstimate bayes_risk_mc(std::size_t p, double tau2, double sigma2,
                           std::size_t trials, Rng& rng) {
  check_risk_args(p, sigma2, trials);
  if (!(tau2 > 0.0)) {
    throw std::invalid_argument("bayes_risk_mc: tau2 must be positive");
  }
  const double tau = std::sqrt(tau2);
  const double sigma = std::sqrt(sigma2);
  const double c = tau2 / (tau2 + sigma2);

  double err_mean = 0.0;
  double err_m2 = 0.0;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    double err = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      const double mu_i = tau * rng.normal();
      const double y_i = mu_i + sigma * rng.normal();
      const double d = c * y_i - mu_i;
      err += d * d;
    }
    const double delta = err - err_mean;
    err_mean += delta / static_cast<double>(trial + 1);
    err_m2 += delta * (err - err_mean);
  }

  RiskEstimate out;
  out.estimator = EstimatorKind::Bayes;
  out.tau2 = tau2;
  out.p = p;
  out.sigma2 = sigma2;
  out.mu_norm = 0.0;
  out.trials = trials;
  out.mse = err_mean;
  out.std_err = trials >= 2 ? std::sqrt(err_m2 / static_cast<double>(trials - 1) /
                                        static_cast<double>(trials))
                            : 0.0;
  return out;
}

std::vector<RiskEstimate> risk_curve(EstimatorKind est, std::size_t p,
                                     double sigma2,
                                     std::span<const double> mu_norm_grid,
                                     std::size_t trials, std::uint64_t seed,
                                     double tau2) {
  std::vector<RiskEstimate> rows;
  rows.reserve(mu_norm_grid.size());
  for (std::size_t i = 0; i < mu_norm_grid.size(); ++i) {
    const double mu_norm = mu_norm_grid[i];
    if (!(mu_norm >= 0.0)) {
      throw std::invalid_argument("risk_curve: mu_norm must be >= 0");
    }
    std::vector<double> mu(p, 0.0);
    mu[0] = mu_norm;
    // Seed depends on the grid point only, never the estimator: common
    // random numbers across estimator curves.
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
    rows.push_back(
        estimate_risk(est, p, sigma2, ParamVector(std::move(mu)), trials, rng, tau2));
  }
  return rows;
}

void write_risk_csv(std::ostream& os, std::span<const RiskEstimate> rows) {
  os << "estimator,p,sigma2,mu_norm,trials,mse,std_err\n";
  for (const auto& r : rows) {
    os << estimator_label(r.estimator, r.tau2) << ',' << r.p << ','
       << fmt_g(r.sigma2) << ',' << fmt_g(r.mu_norm) << ',' << r.trials << ','
       << fmt_g(r.mse) << ',' << fmt_g(r.std_err) << '\n';
  }
}

std::string risk_csv(std::span<const RiskEstimate> rows) {
  std::ostringstream ss;
  write_risk_csv(ss, rows);
  return ss.str();
}

VarianceTrace variance_consistency_sim(std::size_t p, double beta1,
                                       double beta2, std::int64_t steps,
                                       double true_var, Rng& rng, double mean_g,
                                       std::int64_t log_every) {
  if (p == 0 || steps < 1) {
    throw std::invalid_argument("variance_consistency_sim: bad p/steps");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("variance_consistency_sim: betas must lie in [0, 1)");
  }
  if (!(true_var >= 0.0)) {
    throw std::invalid_argument("variance_consistency_sim: true_var must be >= 0");
  }
  if (log_every <= 0) {
    log_every = std::max<std::int64_t>(1, steps / 100);
  }
  const double sigma = std::sqrt(true_var);

  std::vector<double> m(p, 0.0), v(p, 0.0);
  VarianceTrace trace;

  auto sample = [&](std::int64_t t) {
    double acc = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      acc += std::max(0.0, v[i] - m[i] * m[i]);
    }
    const double s2 = acc / static_cast<double>(p);
    trace.step.push_back(t);
    trace.sigma2_hat.push_back(s2);
    if (true_var > 0.0) {
      trace.rel_err.push_back(std::fabs(s2 - true_var) / true_var);
    }
  };

  for (std::int64_t t = 1; t <= steps; ++t) {
    for (std::size_t i = 0; i < p; ++i) {
      const double g = sigma == 0.0 ? mean_g : mean_g + sigma * rng.normal();
      m[i] = beta1 * m[i] + (1.0 - beta1) * g;
      v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
    }
    if (t % log_every == 0 || t == steps) sample(t);
  }

  trace.final_sigma2 = trace.sigma2_hat.back();
  trace.final_rel_err = trace.rel_err.empty() ? 0.0 : trace.rel_err.back();
  return trace;
}

void QuadObjective::validate() const {
  detail::require_same_size(optimum, curvature, "QuadObjective");
  for (std::size_t i = 0; i < curvature.size(); ++i) {
    if (!(curvature[i] > 0.0)) {
      throw std::invalid_argument("QuadObjective: curvature must be positive");
    }
  }
}

double QuadObjective::value(const ParamVector& theta) const {
  detail::require_same_size(theta, optimum, "QuadObjective::value");
  double acc = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double d = theta[i] - optimum[i];
    acc += 0.5 * curvature[i] * d * d;
  }
  return acc;
}

ParamVector QuadObjective::grad(const ParamVector& theta) const {
  detail::require_same_size(theta, optimum, "QuadObjective::grad");
  std::vector<double> g(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    g[i] = curvature[i] * (theta[i] - optimum[i]);
  }
  return ParamVector(std::move(g));
}

QuadObjective QuadObjective::log_spaced(std::size_t p, double a_min,
                                        double a_max) {
  if (p == 0 || !(a_min > 0.0) || !(a_max >= a_min)) {
    throw std::invalid_argument("QuadObjective::log_spaced: bad arguments");
  }
  std::vector<double> a(p);
  for (std::size_t i = 0; i < p; ++i) {
    const double f = p == 1 ? 0.0
                            : static_cast<double>(i) / static_cast<double>(p - 1);
    a[i] = a_min * std::pow(a_max / a_min, f);
  }
  QuadObjective obj{ParamVector::zeros(p), ParamVector(std::move(a))};
  obj.validate();
  return obj;
}

void Schedule::validate() const {
  if (!(alpha0 > 0.0) || !std::isfinite(alpha0)) {
    throw std::invalid_argument("Schedule: alpha0 must be positive");
  }
  if (kind == Kind::Power && !(r > 0.5 && r <= 1.0)) {
    throw std::invalid_argument(
        "Schedule: power decay needs r in (0.5, 1] for summability");
  }
}

double Schedule::at(std::int64_t t) const {
  if (t < 1) {
    throw std::invalid_argument("Schedule::at: t counts from 1");
  }
  if (kind == Kind::Constant) return alpha0;
  return alpha0 * std::pow(static_cast<double>(t), -r);
}

bool Schedule::robbins_monro() const {
  return kind == Kind::Power && r > 0.5 && r <= 1.0;
}

ConvergenceTrace convergence_sim(const QuadObjective& obj, SimOptimizer opt,
                                 const Schedule& sched, double noise_sigma,
                                 std::int64_t steps, Rng& rng, OptimConfig cfg) {
  obj.validate();
  sched.validate();
  if (steps < 1 || !(noise_sigma >= 0.0)) {
    throw std::invalid_argument("convergence_sim: bad steps/noise_sigma");
  }

  const std::size_t p = obj.optimum.size();
  ParamVector theta = ParamVector::constant(p, 1.0);
  MomentState state = MomentState::zeros(p);
  const ParamGroup group("quad", p, GroupKind::ConvWeight);

  ConvergenceTrace trace;
  trace.grad_norm.reserve(static_cast<std::size_t>(steps));
  trace.min_grad_norm = std::numeric_limits<double>::infinity();

  for (std::int64_t t = 1; t <= steps; ++t) {
    ParamVector g_true = obj.grad(theta);
    ParamVector g_noisy =
        noise_sigma == 0.0
            ? g_true
            : axpy(noise_sigma, gauss_vec(rng, p, 0.0, 1.0), g_true);

    cfg.alpha = sched.at(t);
    switch (opt) {
      case SimOptimizer::Sgd:
        theta = sgd_step(theta, g_noisy, cfg.alpha);
        break;
      case SimOptimizer::Adam: {
        AdamResult res = adam_step(theta, g_noisy, state, cfg);
        theta = std::move(res.theta);
        state = std::move(res.state);
        break;
      }
      case SimOptimizer::SrAdam: {
        AdamResult res = sr_adam_step(theta, g_noisy, state, cfg, group);
        theta = std::move(res.theta);
        state = std::move(res.state);
        break;
      }
    }

    const double gn = std::sqrt(sq_norm(obj.grad(theta)));
    trace.grad_norm.push_back(gn);
    if (gn < trace.min_grad_norm) {
      trace.min_grad_norm = gn;
      trace.argmin_step = t;
    }
  }
  return trace;
}

}  // namespace sradam
