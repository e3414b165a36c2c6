#include "sradam/optim.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace sradam {

namespace {

// Shared Adam core. Weight decay is already folded into the gradients here.
// g_m feeds the first moment, g_v the second; they differ only under the
// v_uses_raw_grad ablation.
AdamResult adam_core(const ParamVector& theta, const ParamVector& g_m,
                     const ParamVector& g_v, const MomentState& state,
                     const OptimConfig& cfg) {
  const std::size_t n = theta.size();
  const std::int64_t t = state.t + 1;

  std::vector<double> m(n), v(n), out(n);
  double upd_sq = 0.0;

  const double bc1 = cfg.bias_correction
                         ? 1.0 - std::pow(cfg.beta1, static_cast<double>(t))
                         : 1.0;
  const double bc2 = cfg.bias_correction
                         ? 1.0 - std::pow(cfg.beta2, static_cast<double>(t))
                         : 1.0;

  for (std::size_t i = 0; i < n; ++i) {
    m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g_m[i];
    v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g_v[i] * g_v[i];
    const double m_hat = m[i] / bc1;
    const double v_hat = v[i] / bc2;
    const double delta = cfg.alpha * m_hat / (std::sqrt(v_hat) + cfg.eps);
    out[i] = theta[i] - delta;
    upd_sq += delta * delta;
  }

  AdamResult res{ParamVector(std::move(out)),
                 MomentState{ParamVector(std::move(m)), ParamVector(std::move(v)), t},
                 StepTrace{}};
  res.trace.update_norm = std::sqrt(upd_sq);
  return res;
}

ParamVector with_weight_decay(const ParamVector& g, const ParamVector& theta,
                              double wd) {
  if (wd == 0.0) return g;
  return axpy(wd, theta, g);
}

}  // namespace

const char* to_string(Scope scope) noexcept {
  switch (scope) {
    case Scope::ConvOnly: return "conv_only";
    case Scope::AllWeights: return "all_weights";
    case Scope::None: return "none";
  }
  return "none";
}

const char* to_string(OptimizerKind kind) noexcept {
  switch (kind) {
    case OptimizerKind::Sgd: return "sgd";
    case OptimizerKind::Momentum: return "momentum";
    case OptimizerKind::Adam: return "adam";
    case OptimizerKind::SrAdam: return "sr_adam";
  }
  return "sgd";
}

MomentState MomentState::zeros(std::size_t dim) {
  return MomentState{ParamVector::zeros(dim), ParamVector::zeros(dim), 0};
}

MomentumState MomentumState::zeros(std::size_t dim) {
  return MomentumState{ParamVector::zeros(dim), 0};
}

void OptimConfig::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("OptimConfig: alpha must be positive");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("OptimConfig: betas must lie in [0, 1)");
  }
  if (!(eps > 0.0)) {
    throw std::invalid_argument("OptimConfig: eps must be positive");
  }
  if (!(weight_decay >= 0.0)) {
    throw std::invalid_argument("OptimConfig: weight_decay must be >= 0");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw std::invalid_argument("OptimConfig: momentum must lie in [0, 1)");
  }
  if (tau < 0) {
    throw std::invalid_argument("OptimConfig: tau must be >= 0");
  }
  shrinkage.validate();
}

ParamVector sgd_step(const ParamVector& theta, const ParamVector& g,
                     double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("sgd_step: alpha must be positive");
  }
  return axpy(-alpha, g, theta);
}

std::pair<ParamVector, MomentumState> momentum_step(const ParamVector& theta,
                                                    const ParamVector& g,
                                                    const MomentumState& state,
                                                    double alpha, double mu) {
  if (!(alpha > 0.0) || !(mu >= 0.0 && mu < 1.0)) {
    throw std::invalid_argument("momentum_step: bad alpha/mu");
  }
  detail::require_same_size(theta, g, "momentum_step");
  detail::require_same_size(theta, state.buf, "momentum_step");
  ParamVector buf = axpy(mu, state.buf, g);
  ParamVector out = axpy(-alpha, buf, theta);
  return {std::move(out), MomentumState{std::move(buf), state.t + 1}};
}

AdamResult adam_step(const ParamVector& theta, const ParamVector& g,
                     const MomentState& state, const OptimConfig& cfg) {
  cfg.validate();
  detail::require_same_size(theta, g, "adam_step");
  detail::require_same_size(theta, state.m, "adam_step");
  detail::require_same_size(theta, state.v, "adam_step");
  const ParamVector g_eff = with_weight_decay(g, theta, cfg.weight_decay);
  return adam_core(theta, g_eff, g_eff, state, cfg);
}

AdamResult sr_adam_step(const ParamVector& theta, const ParamVector& g,
                        const MomentState& state, const OptimConfig& cfg,
                        const ParamGroup& group) {
  cfg.validate();
  detail::require_same_size(theta, g, "sr_adam_step");
  detail::require_same_size(theta, state.m, "sr_adam_step");
  detail::require_same_size(theta, state.v, "sr_adam_step");
  if (group.dim != theta.size()) {
    throw std::invalid_argument("sr_adam_step: group dim mismatch for " +
                                group.id);
  }

  const ParamVector g_eff = with_weight_decay(g, theta, cfg.weight_decay);

  const bool in_scope = cfg.scope != Scope::None && group.shrinkage_enabled &&
                        group.dim >= cfg.shrinkage.min_dim;
  const bool past_warmup = state.t + 1 > cfg.tau;

  if (!in_scope || !past_warmup) {
    AdamResult res = adam_core(theta, g_eff, g_eff, state, cfg);
    res.trace.group_id = group.id;
    return res;
  }

  auto [g_hat, report] = apply_shrinkage(g_eff, state.m, state.v, cfg.shrinkage);
  const ParamVector& g_v = cfg.v_uses_raw_grad ? g_eff : g_hat;
  AdamResult res = adam_core(theta, g_hat, g_v, state, cfg);
  res.trace.group_id = group.id;
  res.trace.shrinkage = report;
  return res;
}

std::vector<ParamGroup> apply_scope(std::vector<ParamGroup> groups,
                                    Scope scope) {
  for (auto& g : groups) {
    switch (scope) {
      case Scope::ConvOnly:
        g.shrinkage_enabled = g.kind == GroupKind::ConvWeight;
        break;
      case Scope::AllWeights:
        g.shrinkage_enabled = g.kind == GroupKind::ConvWeight ||
                              g.kind == GroupKind::DenseWeight;
        break;
      case Scope::None:
        g.shrinkage_enabled = false;
        break;
    }
  }
  return groups;
}

Optimizer::Optimizer(OptimizerKind kind, OptimConfig cfg,
                     const std::vector<ParamGroup>& groups)
    : kind_(kind), cfg_(cfg), groups_(apply_scope(groups, cfg.scope)) {
  cfg_.validate();
  moments_.reserve(groups_.size());
  buffers_.reserve(groups_.size());
  for (const auto& g : groups_) {
    moments_.push_back(MomentState::zeros(g.dim));
    buffers_.push_back(MomentumState::zeros(g.dim));
  }
}

std::vector<StepTrace> Optimizer::step(std::vector<ParamVector>& params,
                                       const std::vector<ParamVector>& grads) {
  if (params.size() != groups_.size() || grads.size() != groups_.size()) {
    throw std::invalid_argument("Optimizer::step: group count mismatch");
  }
  std::vector<StepTrace> traces(groups_.size());
  for (std::size_t i = 0; i < groups_.size(); ++i) {
    traces[i].group_id = groups_[i].id;
    switch (kind_) {
      case OptimizerKind::Sgd: {
        ParamVector g_eff =
            with_weight_decay(grads[i], params[i], cfg_.weight_decay);
        ParamVector next = sgd_step(params[i], g_eff, cfg_.alpha);
        traces[i].update_norm =
            std::sqrt(divergence(next, params[i]));
        params[i] = std::move(next);
        break;
      }
      case OptimizerKind::Momentum: {
        ParamVector g_eff =
            with_weight_decay(grads[i], params[i], cfg_.weight_decay);
        auto [next, buf] = momentum_step(params[i], g_eff, buffers_[i],
                                         cfg_.alpha, cfg_.momentum);
        traces[i].update_norm = std::sqrt(divergence(next, params[i]));
        params[i] = std::move(next);
        buffers_[i] = std::move(buf);
        break;
      }
      case OptimizerKind::Adam: {
        AdamResult res = adam_step(params[i], grads[i], moments_[i], cfg_);
        res.trace.group_id = groups_[i].id;
        params[i] = std::move(res.theta);
        moments_[i] = std::move(res.state);
        traces[i] = std::move(res.trace);
        break;
      }
      case OptimizerKind::SrAdam: {
        AdamResult res =
            sr_adam_step(params[i], grads[i], moments_[i], cfg_, groups_[i]);
        params[i] = std::move(res.theta);
        moments_[i] = std::move(res.state);
        traces[i] = std::move(res.trace);
        break;
      }
    }
  }
  return traces;
}

}  // namespace sradam
