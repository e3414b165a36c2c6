#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sradam/optim.hpp"
#include "sradam/rng.hpp"
#include "sradam/vec.hpp"

namespace sradam {

/// Location estimators under Gaussian noise, Y ~ N(mu, sigma2 * I).
enum class EstimatorKind {
  UE,      ///< Y itself (unbiased)
  JS,      ///< (1 - (p-2) sigma2 / |Y|^2) Y
  JSPlus,  ///< positive-part James-Stein
  Bayes,   ///< tau2/(tau2+sigma2) Y, the posterior mean for mu ~ N(0, tau2 I)
};

/// Estimator label as it appears in CSV output; Bayes carries its prior
/// variance, e.g. "Bayes(1)".
std::string estimator_label(EstimatorKind kind, double tau2);

struct RiskEstimate {
  EstimatorKind estimator = EstimatorKind::UE;
  double tau2 = 1.0;  ///< only meaningful for Bayes
  std::size_t p = 0;
  double sigma2 = 1.0;
  double mu_norm = 0.0;
  std::size_t trials = 0;
  double mse = 0.0;
  double std_err = 0.0;
};

/// Monte Carlo risk E|est(Y) - mu|^2 at a fixed mu. Draws p normals per
/// trial in a fixed order, so two calls with identically seeded rngs see the
/// same noise regardless of estimator (common random numbers).
/// Requires p >= 3, sigma2 > 0, mu.size() == p, trials >= 1.
RiskEstimate estimate_risk(EstimatorKind est, std::size_t p, double sigma2,
                           const ParamVector& mu, std::size_t trials, Rng& rng,
                           double tau2 = 1.0);

/// Exact Bayes risk of the posterior-mean rule: p * tau2 * sigma2 / (tau2 + sigma2).
double bayes_risk_closed_form(std::size_t p, double tau2, double sigma2);

/// Posterior mean tau2/(tau2+sigma2) * y.
ParamVector bayes_estimator(const ParamVector& y, double tau2, double sigma2);

/// Monte Carlo Bayes risk: mu ~ N(0, tau2 I) redrawn each trial, then the
/// posterior-mean rule applied to mu + noise.
RiskEstimate bayes_risk_mc(std::size_t p, double tau2, double sigma2,
                           std::size_t trials, Rng& rng);

/// Risk along |mu| with the direction pinned to the first axis. The rng for
/// grid point i derives from (seed, i) only, so curves for different
/// estimators at the same seed share every noise draw.
std::vector<RiskEstimate> risk_curve(EstimatorKind est, std::size_t p,
                                     double sigma2,
                                     std::span<const double> mu_norm_grid,
                                     std::size_t trials, std::uint64_t seed,
                                     double tau2 = 1.0);

/// CSV with the exact header
/// estimator,p,sigma2,mu_norm,trials,mse,std_err
void write_risk_csv(std::ostream& os, std::span<const RiskEstimate> rows);
std::string risk_csv(std::span<const RiskEstimate> rows);

/// Trace of the global variance estimate against an i.i.d. Gaussian gradient
/// stream g_t ~ N(mean_g, true_var * I) fed through the moment EMAs.
struct VarianceTrace {
  std::vector<std::int64_t> step;
  std::vector<double> sigma2_hat;
  std::vector<double> rel_err;  ///< |sigma2_hat - true_var| / true_var; empty if true_var = 0
  double final_sigma2 = 0.0;
  double final_rel_err = 0.0;
};

/// Runs the EMAs for `steps` iterations and samples the estimate every
/// `log_every` steps (0 picks ~100 samples). true_var = 0 degenerates to a
/// constant stream and consumes no randomness.
VarianceTrace variance_consistency_sim(std::size_t p, double beta1,
                                       double beta2, std::int64_t steps,
                                       double true_var, Rng& rng,
                                       double mean_g = 1.0,
                                       std::int64_t log_every = 0);

/// Diagonal quadratic test objective J(theta) = 0.5 sum a_i (theta_i - o_i)^2.
struct QuadObjective {
  ParamVector optimum;
  ParamVector curvature;  ///< diagonal of A; all entries > 0

  void validate() const;
  double value(const ParamVector& theta) const;
  ParamVector grad(const ParamVector& theta) const;

  /// p-dim instance with curvatures log-spaced in [a_min, a_max] and the
  /// optimum at the origin.
  static QuadObjective log_spaced(std::size_t p, double a_min, double a_max);
};

/// Step-size schedule. Power decay alpha0 * t^-r satisfies the classic
/// stochastic-approximation conditions (sum alpha = inf, sum alpha^2 < inf)
/// exactly when r lies in (0.5, 1]; validate() enforces that range.
struct Schedule {
  enum class Kind { Constant, Power };
  Kind kind = Kind::Power;
  double alpha0 = 0.5;
  double r = 0.6;

  void validate() const;
  double at(std::int64_t t) const;  ///< t counts from 1
  bool robbins_monro() const;
};

enum class SimOptimizer { Sgd, Adam, SrAdam };

struct ConvergenceTrace {
  std::vector<double> grad_norm;  ///< true-gradient norm after each step
  double min_grad_norm = 0.0;
  std::int64_t argmin_step = 0;  ///< 1-based step index of the minimum
};

/// Runs an optimizer on the quadratic with additive N(0, noise_sigma^2 I)
/// gradient noise under the given schedule. cfg supplies the Adam knobs; the
/// schedule overrides cfg.alpha each step. SrAdam treats the whole vector as
/// one shrinkage-eligible group.
ConvergenceTrace convergence_sim(const QuadObjective& obj, SimOptimizer opt,
                                 const Schedule& sched, double noise_sigma,
                                 std::int64_t steps, Rng& rng,
                                 OptimConfig cfg = OptimConfig{});

}  // namespace sradam
