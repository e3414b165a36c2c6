#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sradam/stein.hpp"
#include "sradam/vec.hpp"

namespace sradam {

/// Which parameter groups get shrinkage.
enum class Scope { ConvOnly, AllWeights, None };

const char* to_string(Scope scope) noexcept;

/// First/second moment EMAs plus the completed-step counter.
struct MomentState {
  ParamVector m;
  ParamVector v;
  std::int64_t t = 0;

  static MomentState zeros(std::size_t dim);
};

/// Heavy-ball buffer.
struct MomentumState {
  ParamVector buf;
  std::int64_t t = 0;

  static MomentumState zeros(std::size_t dim);
};

struct OptimConfig {
  double alpha = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
  double momentum = 0.9;         ///< heavy-ball coefficient (momentum_step only)
  std::int64_t tau = 10;         ///< warm-up: shrink only once the step counter exceeds tau
  bool bias_correction = true;   ///< debias m, v before the update
  bool v_uses_raw_grad = false;  ///< ablation: feed the unshrunk gradient into v
  ShrinkageConfig shrinkage;
  Scope scope = Scope::ConvOnly;

  void validate() const;
};

/// Per-group record of what one step did.
struct StepTrace {
  std::string group_id;
  ShrinkageReport shrinkage;  ///< applied = false when the step was plain
  double update_norm = 0.0;   ///< Euclidean norm of theta_new - theta
};

struct AdamResult {
  ParamVector theta;
  MomentState state;
  StepTrace trace;
};

/// theta - alpha * g. Pure.
ParamVector sgd_step(const ParamVector& theta, const ParamVector& g,
                     double alpha);

/// Heavy ball: buf' = mu * buf + g; theta' = theta - alpha * buf'.
std::pair<ParamVector, MomentumState> momentum_step(const ParamVector& theta,
                                                    const ParamVector& g,
                                                    const MomentumState& state,
                                                    double alpha, double mu);

/// One Adam step. Decoupled knobs live in cfg; weight decay (if any) is added
/// to the gradient before the moment updates.
AdamResult adam_step(const ParamVector& theta, const ParamVector& g,
                     const MomentState& state, const OptimConfig& cfg);

/// One shrunk-gradient Adam step. While the counter is within the warm-up,
/// the group is out of scope, or its dimension is below min_dim, the step is
/// bit-identical to adam_step with the same cfg. Otherwise the gradient is
/// shrunk toward the previous first moment (factor computed from the
/// previous-step moments) and the moments are updated with the shrunk
/// gradient (cfg.v_uses_raw_grad diverts the raw one into v).
AdamResult sr_adam_step(const ParamVector& theta, const ParamVector& g,
                        const MomentState& state, const OptimConfig& cfg,
                        const ParamGroup& group);

/// Rewrites shrinkage_enabled on every group to match the scope policy.
std::vector<ParamGroup> apply_scope(std::vector<ParamGroup> groups,
                                    Scope scope);

/// Multi-group driver used by the training harness. Holds per-group state and
/// steps every group in order.
enum class OptimizerKind { Sgd, Momentum, Adam, SrAdam };

const char* to_string(OptimizerKind kind) noexcept;

class Optimizer {
 public:
  Optimizer(OptimizerKind kind, OptimConfig cfg,
            const std::vector<ParamGroup>& groups);

  /// Steps all groups in index order; params is updated in place.
  std::vector<StepTrace> step(std::vector<ParamVector>& params,
                              const std::vector<ParamVector>& grads);

  OptimizerKind kind() const noexcept { return kind_; }
  const OptimConfig& config() const noexcept { return cfg_; }
  const std::vector<ParamGroup>& groups() const noexcept { return groups_; }

 private:
  OptimizerKind kind_;
  OptimConfig cfg_;
  std::vector<ParamGroup> groups_;
  std::vector<MomentState> moments_;
  std::vector<MomentumState> buffers_;
};

}  // namespace sradam
