#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "sradam/optim.hpp"
#include "sradam/rng.hpp"

using namespace sradam;

namespace {

bool bitwise_equal(const ParamVector& a, const ParamVector& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return false;
  }
  return true;
}

// Scalar reference Adam, written independently of the library loop.
struct RefAdam {
  double m = 0.0, v = 0.0;
  int t = 0;
  double step(double theta, double g, const OptimConfig& c) {
    ++t;
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g * g;
    double mh = m, vh = v;
    if (c.bias_correction) {
      mh /= 1.0 - std::pow(c.beta1, t);
      vh /= 1.0 - std::pow(c.beta2, t);
    }
    return theta - c.alpha * mh / (std::sqrt(vh) + c.eps);
  }
};

}  // namespace

TEST_CASE("sgd worked example") {
  ParamVector theta({1.0, 2.0});
  ParamVector g({0.5, -1.0});
  auto out = sgd_step(theta, g, 0.1);
  CHECK(out[0] == doctest::Approx(0.95));
  CHECK(out[1] == doctest::Approx(2.1));
  CHECK_THROWS_AS(sgd_step(theta, g, 0.0), std::invalid_argument);
}

TEST_CASE("heavy-ball momentum accumulates the buffer") {
  ParamVector theta({0.0});
  ParamVector g({1.0});
  auto s = MomentumState::zeros(1);
  auto [t1, s1] = momentum_step(theta, g, s, 0.1, 0.9);
  CHECK(t1[0] == doctest::Approx(-0.1));  // buf = 1
  auto [t2, s2] = momentum_step(t1, g, s1, 0.1, 0.9);
  CHECK(s2.buf[0] == doctest::Approx(1.9));  // 0.9*1 + 1
  CHECK(t2[0] == doctest::Approx(-0.1 - 0.19));
  CHECK(s2.t == 2);
}

TEST_CASE("adam first step closed form with bias correction") {
  OptimConfig cfg;  // alpha 1e-3, betas 0.9/0.999, eps 1e-8
  ParamVector theta({1.0, -2.0, 0.5});
  ParamVector g({0.3, -0.7, 2.0});
  auto res = adam_step(theta, g, MomentState::zeros(3), cfg);
  // After debiasing, m_hat = g and v_hat = g^2, so the move is
  // alpha * g / (|g| + eps): alpha * sign(g) up to eps.
  for (std::size_t i = 0; i < 3; ++i) {
    const double expect =
        theta[i] - cfg.alpha * g[i] / (std::fabs(g[i]) + cfg.eps);
    CHECK(res.theta[i] == doctest::Approx(expect).epsilon(1e-12));
  }
  CHECK(res.state.t == 1);
}

TEST_CASE("adam first step without bias correction") {
  OptimConfig cfg;
  cfg.bias_correction = false;
  ParamVector theta({1.0});
  ParamVector g({2.0});
  auto res = adam_step(theta, g, MomentState::zeros(1), cfg);
  const double m = 0.1 * 2.0;
  const double v = 0.001 * 4.0;
  const double expect = 1.0 - cfg.alpha * m / (std::sqrt(v) + cfg.eps);
  CHECK(res.theta[0] == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("adam tracks a scalar reference over many steps") {
  OptimConfig cfg;
  cfg.alpha = 0.01;
  Rng r(404);
  ParamVector theta({0.7});
  auto st = MomentState::zeros(1);
  RefAdam ref;
  double ref_theta = 0.7;
  for (int k = 0; k < 200; ++k) {
    const double g = r.normal();
    auto res = adam_step(theta, ParamVector({g}), st, cfg);
    ref_theta = ref.step(ref_theta, g, cfg);
    theta = res.theta;
    st = res.state;
    CHECK(theta[0] == doctest::Approx(ref_theta).epsilon(1e-12));
  }
}

TEST_CASE("weight decay folds into the gradient before the moments") {
  OptimConfig cfg;
  cfg.weight_decay = 0.1;
  ParamVector theta({2.0, -1.0});
  ParamVector g({0.5, 0.5});
  auto a = adam_step(theta, g, MomentState::zeros(2), cfg);

  OptimConfig plain = cfg;
  plain.weight_decay = 0.0;
  ParamVector g_wd({0.5 + 0.1 * 2.0, 0.5 + 0.1 * (-1.0)});
  auto b = adam_step(theta, g_wd, MomentState::zeros(2), plain);
  CHECK(bitwise_equal(a.theta, b.theta));
  CHECK(bitwise_equal(a.state.v, b.state.v));
}

TEST_CASE("shrunk variant matches adam bit for bit through the warm-up") {
  OptimConfig cfg;
  cfg.tau = 10;
  cfg.bias_correction = false;
  ParamGroup group("conv1.weight", 64, GroupKind::ConvWeight);

  Rng r(2718);
  ParamVector theta_a = gauss_vec(r, 64, 0.0, 1.0);
  ParamVector theta_b = theta_a;
  auto sa = MomentState::zeros(64);
  auto sb = MomentState::zeros(64);

  for (int k = 1; k <= 10; ++k) {
    auto g = gauss_vec(r, 64, 0.0, 1.0);
    auto ra = adam_step(theta_a, g, sa, cfg);
    auto rb = sr_adam_step(theta_b, g, sb, cfg, group);
    theta_a = ra.theta;
    theta_b = rb.theta;
    sa = ra.state;
    sb = rb.state;
    CHECK(bitwise_equal(theta_a, theta_b));
    CHECK(bitwise_equal(sa.m, sb.m));
    CHECK(bitwise_equal(sa.v, sb.v));
    CHECK_FALSE(rb.trace.shrinkage.applied);
  }

  // Step 11 crosses the warm-up boundary: shrinkage activates.
  auto g = gauss_vec(r, 64, 0.0, 1.0);
  auto ra = adam_step(theta_a, g, sa, cfg);
  auto rb = sr_adam_step(theta_b, g, sb, cfg, group);
  CHECK(rb.trace.shrinkage.applied);
  CHECK(rb.trace.shrinkage.c_clipped < 1.0);
  CHECK_FALSE(bitwise_equal(ra.theta, rb.theta));
}

TEST_CASE("out-of-scope groups always take the plain path") {
  OptimConfig cfg;
  cfg.tau = 0;
  ParamGroup bias("conv1.bias", 32, GroupKind::Bias);
  bias.shrinkage_enabled = false;

  Rng r(99);
  ParamVector theta = gauss_vec(r, 32, 0.0, 1.0);
  ParamVector theta2 = theta;
  auto s1 = MomentState::zeros(32);
  auto s2 = MomentState::zeros(32);
  for (int k = 0; k < 20; ++k) {
    auto g = gauss_vec(r, 32, 0.0, 1.0);
    auto ra = adam_step(theta, g, s1, cfg);
    auto rb = sr_adam_step(theta2, g, s2, cfg, bias);
    theta = ra.theta;
    theta2 = rb.theta;
    s1 = ra.state;
    s2 = rb.state;
    CHECK_FALSE(rb.trace.shrinkage.applied);
  }
  CHECK(bitwise_equal(theta, theta2));
}

TEST_CASE("groups below the dimension cutoff pass through") {
  OptimConfig cfg;
  cfg.tau = 0;
  cfg.shrinkage.min_dim = 8;
  ParamGroup tiny("head.weight", 4, GroupKind::ConvWeight);
  Rng r(7);
  ParamVector theta = gauss_vec(r, 4, 0.0, 1.0);
  auto g = gauss_vec(r, 4, 0.0, 1.0);
  auto rb = sr_adam_step(theta, g, MomentState::zeros(4), cfg, tiny);
  auto ra = adam_step(theta, g, MomentState::zeros(4), cfg);
  CHECK(bitwise_equal(ra.theta, rb.theta));
  CHECK_FALSE(rb.trace.shrinkage.applied);
}

TEST_CASE("a constant gradient stream never shrinks") {
  // With a constant gradient the EMA variance estimate v - m^2 is
  // 2*b1^t - b1^(2t) - b2^t times g^2, which is negative for b2 > b1 regimes,
  // so the clamped noise estimate is exactly zero and the factor is 1.
  OptimConfig cfg;
  cfg.tau = 5;
  cfg.bias_correction = false;
  ParamGroup group("conv.weight", 16, GroupKind::ConvWeight);
  ParamVector g = ParamVector::constant(16, 0.75);

  ParamVector ta = ParamVector::constant(16, 1.0);
  ParamVector tb = ta;
  auto sa = MomentState::zeros(16);
  auto sb = MomentState::zeros(16);
  for (int k = 0; k < 50; ++k) {
    auto ra = adam_step(ta, g, sa, cfg);
    auto rb = sr_adam_step(tb, g, sb, cfg, group);
    ta = ra.theta;
    tb = rb.theta;
    sa = ra.state;
    sb = rb.state;
    REQUIRE(bitwise_equal(ta, tb));
    if (rb.trace.shrinkage.applied) {
      CHECK(rb.trace.shrinkage.sigma2_hat == 0.0);
      CHECK(rb.trace.shrinkage.c_clipped == 1.0);
    }
  }
}

TEST_CASE("raw-gradient ablation changes only the second moment") {
  OptimConfig cfg;
  cfg.tau = 0;
  cfg.bias_correction = false;
  ParamGroup group("conv.weight", 32, GroupKind::ConvWeight);

  // Build a state where shrinkage will genuinely bind.
  Rng r(5150);
  auto st = MomentState::zeros(32);
  ParamVector theta = gauss_vec(r, 32, 0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    auto g = gauss_vec(r, 32, 0.0, 2.0);
    auto res = sr_adam_step(theta, g, st, cfg, group);
    theta = res.theta;
    st = res.state;
  }

  auto g = gauss_vec(r, 32, 0.0, 2.0);
  OptimConfig raw = cfg;
  raw.v_uses_raw_grad = true;
  auto shrunk_v = sr_adam_step(theta, g, st, cfg, group);
  auto raw_v = sr_adam_step(theta, g, st, raw, group);
  REQUIRE(shrunk_v.trace.shrinkage.applied);
  REQUIRE(shrunk_v.trace.shrinkage.c_clipped < 1.0);
  CHECK(bitwise_equal(shrunk_v.state.m, raw_v.state.m));
  CHECK_FALSE(bitwise_equal(shrunk_v.state.v, raw_v.state.v));
}

TEST_CASE("scope rewrite drives the per-group flags") {
  std::vector<ParamGroup> gs{ParamGroup("c.weight", 10, GroupKind::ConvWeight),
                             ParamGroup("d.weight", 10, GroupKind::DenseWeight),
                             ParamGroup("c.bias", 10, GroupKind::Bias)};
  auto conv_only = apply_scope(gs, Scope::ConvOnly);
  CHECK(conv_only[0].shrinkage_enabled);
  CHECK_FALSE(conv_only[1].shrinkage_enabled);
  CHECK_FALSE(conv_only[2].shrinkage_enabled);
  auto all_w = apply_scope(gs, Scope::AllWeights);
  CHECK(all_w[0].shrinkage_enabled);
  CHECK(all_w[1].shrinkage_enabled);
  CHECK_FALSE(all_w[2].shrinkage_enabled);
  auto none = apply_scope(gs, Scope::None);
  CHECK_FALSE(none[0].shrinkage_enabled);
}

TEST_CASE("multi-group driver matches single steps") {
  std::vector<ParamGroup> gs{ParamGroup("a.weight", 8, GroupKind::ConvWeight),
                             ParamGroup("a.bias", 4, GroupKind::Bias)};
  OptimConfig cfg;
  cfg.scope = Scope::None;
  Optimizer opt(OptimizerKind::Adam, cfg, gs);

  Rng r(808);
  std::vector<ParamVector> params{gauss_vec(r, 8, 0.0, 1.0),
                                  gauss_vec(r, 4, 0.0, 1.0)};
  std::vector<ParamVector> ref = params;
  std::vector<MomentState> st{MomentState::zeros(8), MomentState::zeros(4)};

  for (int k = 0; k < 5; ++k) {
    std::vector<ParamVector> grads{gauss_vec(r, 8, 0.0, 1.0),
                                   gauss_vec(r, 4, 0.0, 1.0)};
    auto traces = opt.step(params, grads);
    REQUIRE(traces.size() == 2);
    CHECK(traces[0].group_id == "a.weight");
    for (std::size_t i = 0; i < 2; ++i) {
      auto res = adam_step(ref[i], grads[i], st[i], cfg);
      ref[i] = res.theta;
      st[i] = res.state;
      CHECK(bitwise_equal(params[i], ref[i]));
    }
    CHECK(traces[1].update_norm > 0.0);
  }
}

TEST_CASE("config validation flags bad values") {
  OptimConfig cfg;
  cfg.beta1 = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  OptimConfig c2;
  c2.alpha = -1.0;
  CHECK_THROWS_AS(c2.validate(), std::invalid_argument);
  OptimConfig c3;
  c3.tau = -2;
  CHECK_THROWS_AS(c3.validate(), std::invalid_argument);
}
