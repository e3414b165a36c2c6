#include "sradam/stein.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sradam {

namespace {

void require_nonnegative(const ParamVector& v, const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < 0.0) {
      throw std::invalid_argument(std::string(what) +
                                  ": negative second moment at index " +
                                  std::to_string(i));
    }
  }
}

}  // namespace

void ShrinkageConfig::validate() const {
  if (!(clip_floor >= 0.0) || !(clip_ceil <= 1.0) || !(clip_floor < clip_ceil)) {
    throw std::invalid_argument(
        "ShrinkageConfig: need 0 <= clip_floor < clip_ceil <= 1");
  }
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw std::invalid_argument("ShrinkageConfig: eps must be positive");
  }
  if (min_dim < 3) {
    throw std::invalid_argument("ShrinkageConfig: min_dim must be >= 3");
  }
}

double divergence(const ParamVector& g, const ParamVector& m_prev) {
  detail::require_same_size(g, m_prev, "divergence");
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double d = g[i] - m_prev[i];
    acc += d * d;
  }
  return acc;
}

double sigma2_global(const ParamVector& m, const ParamVector& v) {
  detail::require_same_size(m, v, "sigma2_global");
  require_nonnegative(v, "sigma2_global");
  double acc = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    acc += std::max(0.0, v[i] - m[i] * m[i]);
  }
  return acc / static_cast<double>(m.size());
}

ShrinkageReport shrink_factor(std::size_t p, double sigma2, double d_n,
                              const ShrinkageConfig& cfg) {
  cfg.validate();
  if (p < cfg.min_dim) {
    throw std::invalid_argument("shrink_factor: dimension " +
                                std::to_string(p) + " below min_dim " +
                                std::to_string(cfg.min_dim));
  }
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) {
    throw std::invalid_argument("shrink_factor: sigma2 must be finite and >= 0");
  }
  if (!(d_n >= 0.0) || !std::isfinite(d_n)) {
    throw std::invalid_argument("shrink_factor: d_n must be finite and >= 0");
  }

  ShrinkageReport rep;
  rep.d_n = d_n;
  rep.sigma2_hat = sigma2;
  if (d_n <= cfg.eps) {
    // Gradient sits on the running mean; nothing to shrink toward.
    rep.c_raw = 1.0;
    rep.c_clipped = 1.0;
    rep.applied = false;
    return rep;
  }
  rep.c_raw = 1.0 - static_cast<double>(p - 2) * sigma2 / d_n;
  rep.c_clipped =
      std::min(cfg.clip_ceil, std::max(cfg.clip_floor, std::max(0.0, rep.c_raw)));
  rep.applied = true;
  return rep;
}

ParamVector stein_estimate(const ParamVector& g, const ParamVector& m_prev,
                           double c) {
  detail::require_same_size(g, m_prev, "stein_estimate");
  if (!(c >= 0.0 && c <= 1.0)) {
    throw std::invalid_argument("stein_estimate: c outside [0, 1]");
  }
  if (c == 1.0) return g;
  if (c == 0.0) return m_prev;
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    out[i] = m_prev[i] + c * (g[i] - m_prev[i]);
  }
  return ParamVector(std::move(out));
}

std::pair<ParamVector, ShrinkageReport> whitened_shrink(
    const ParamVector& g, const ParamVector& m_prev, const ParamVector& v_prev,
    const ShrinkageConfig& cfg) {
  cfg.validate();
  detail::require_same_size(g, m_prev, "whitened_shrink");
  detail::require_same_size(g, v_prev, "whitened_shrink");
  require_nonnegative(v_prev, "whitened_shrink");

  const std::size_t p = g.size();
  double d_n = 0.0;
  double s2 = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    const double scale = v_prev[i] + cfg.eps;
    const double d = g[i] - m_prev[i];
    d_n += d * d / scale;
    s2 += std::max(0.0, v_prev[i] - m_prev[i] * m_prev[i]) / scale;
  }
  s2 /= static_cast<double>(p);

  const ShrinkageReport rep = shrink_factor(p, s2, d_n, cfg);
  return {stein_estimate(g, m_prev, rep.c_clipped), rep};
}

std::pair<ParamVector, ShrinkageReport> apply_shrinkage(
    const ParamVector& g, const ParamVector& m_prev, const ParamVector& v_prev,
    const ShrinkageConfig& cfg) {
  if (cfg.whiten) {
    return whitened_shrink(g, m_prev, v_prev, cfg);
  }
  const double d_n = divergence(g, m_prev);
  const double s2 = sigma2_global(m_prev, v_prev);
  const ShrinkageReport rep = shrink_factor(g.size(), s2, d_n, cfg);
  return {stein_estimate(g, m_prev, rep.c_clipped), rep};
}

}  // namespace sradam
