#pragma once

#include <cstddef>
#include <utility>

#include "sradam/vec.hpp"

namespace sradam {

/// Knobs for the positive-part shrinkage rule.
struct ShrinkageConfig {
  double clip_floor = 0.1;  ///< lower clamp for the factor; 0 disables the floor
  double clip_ceil = 1.0;   ///< upper clamp; 1 means "never amplify"
  bool whiten = true;       ///< scale coordinates by 1/sqrt(v + eps) first
  double eps = 1e-8;        ///< numerical guard for divisors
  std::size_t min_dim = 3;  ///< groups below this dimension pass through

  void validate() const;
};

/// What one shrinkage evaluation did. d_n and sigma2_hat are reported in the
/// space the factor was computed in (whitened when cfg.whiten is set).
struct ShrinkageReport {
  double d_n = 0.0;
  double sigma2_hat = 0.0;
  double c_raw = 1.0;
  double c_clipped = 1.0;
  bool applied = false;
};

/// Squared distance between the fresh gradient and the running mean,
/// accumulated in index order.
double divergence(const ParamVector& g, const ParamVector& m_prev);

/// Scalar noise-level estimate: mean over coordinates of max(0, v_j - m_j^2).
/// Negative per-coordinate values (an EMA artifact) clamp to zero before the
/// mean, so the result is never negative. Requires v >= 0 element-wise.
double sigma2_global(const ParamVector& m, const ParamVector& v);

/// Positive-part factor c = clamp(max(0, 1 - (p-2) sigma2 / d_n)).
/// d_n <= cfg.eps reports a pass-through (c = 1, applied = false) instead of
/// dividing by zero. The clip floor binds only when shrinkage applies.
ShrinkageReport shrink_factor(std::size_t p, double sigma2, double d_n,
                              const ShrinkageConfig& cfg);

/// m_prev + c * (g - m_prev). c = 1 returns g bitwise and c = 0 returns
/// m_prev bitwise (special-cased; the blend form would perturb last bits).
/// Requires c in [0, 1].
ParamVector stein_estimate(const ParamVector& g, const ParamVector& m_prev,
                           double c);

/// Shrinkage with per-coordinate whitening by 1/sqrt(v_prev + eps): the
/// factor is computed from the whitened difference and a whitened noise
/// estimate, then applied to the raw (unwhitened) difference. Scale-invariant:
/// scaling g, m by s and v by s^2 leaves c unchanged.
std::pair<ParamVector, ShrinkageReport> whitened_shrink(
    const ParamVector& g, const ParamVector& m_prev, const ParamVector& v_prev,
    const ShrinkageConfig& cfg);

/// Dispatch on cfg.whiten: either whitened_shrink or the plain pipeline
/// (divergence / sigma2_global / shrink_factor / stein_estimate).
std::pair<ParamVector, ShrinkageReport> apply_shrinkage(
    const ParamVector& g, const ParamVector& m_prev, const ParamVector& v_prev,
    const ShrinkageConfig& cfg);

}  // namespace sradam
