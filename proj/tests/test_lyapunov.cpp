#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "fractalscape/error.hpp"
#include "fractalscape/lyapunov.hpp"
#include "fractalscape/rng.hpp"

using namespace fractalscape;

namespace {

ParamVector gain(double k) { return ParamVector(PolicySpec::linear(), {k}); }

// Time average of log|F'(s_t)| for F(s) = theta s (1 - s) over the steps the
// estimator counts.
double derivative_oracle(double theta, double s0, const MleConfig& cfg) {
  double s = s0;
  for (std::size_t t = 0; t < cfg.transient_skip; ++t) s = (1.0 - s) * (theta * s);
  double sum = 0.0;
  const std::size_t n = cfg.t_max - cfg.transient_skip;
  for (std::size_t t = 0; t < n; ++t) {
    sum += std::log(std::abs(theta * (1.0 - 2.0 * s)));
    s = (1.0 - s) * (theta * s);
  }
  return sum / static_cast<double>(n);
}

// tanh net with u(s) = (k / eps) tanh(eps s): slope k at the origin.
ParamVector gaussian_gain(double k, double sigma) {
  const double eps = 1e-3;
  return ParamVector(PolicySpec::tanh_net(1, 1, 1, true), {eps, k / eps, std::log(sigma)});
}

}  // namespace

TEST(Lyapunov, SaturatingMapEqualsLogGain) {
  const auto env = EnvModel::make(EnvKind::sat1d);
  for (double theta : {1.2, 1.5, 2.0}) {
    const MleEstimate e = estimate_mle(env, gain(theta), State{0.0}, MleConfig{});
    EXPECT_NEAR(e.lambda, std::log(theta), 1e-3) << theta;
    EXPECT_GT(e.n_renorms, 0u);
  }
}

TEST(Lyapunov, LinearContraction) {
  const auto env = EnvModel::make(EnvKind::sat1d);
  const MleEstimate e = estimate_mle(env, gain(0.5), State{0.3}, MleConfig{});
  EXPECT_NEAR(e.lambda, std::log(0.5), 1e-6);
}

TEST(Lyapunov, LogisticFullyChaotic) {
  const auto env = EnvModel::make(EnvKind::logistic);
  MleConfig cfg;
  const MleEstimate e = estimate_mle(env, gain(4.0), State{0.9}, cfg);
  EXPECT_NEAR(e.lambda, std::log(2.0), 0.02);
  EXPECT_NEAR(e.lambda, derivative_oracle(4.0, 0.9, cfg), 1e-2);
}

TEST(Lyapunov, DerivativeOracleAgreement) {
  const auto env = EnvModel::make(EnvKind::logistic);
  RngStream rng(41, StreamTag::mle, 0);
  MleConfig cfg;
  for (int i = 0; i < 20; ++i) {
    const double theta = 0.5 + 3.5 * rng.uniform();
    const MleEstimate e = estimate_mle(env, gain(theta), State{0.9}, cfg);
    EXPECT_NEAR(e.lambda, derivative_oracle(theta, 0.9, cfg), 1e-2) << "theta " << theta;
  }
}

TEST(Lyapunov, StableFixedPointRegime) {
  const auto env = EnvModel::make(EnvKind::logistic);
  const MleEstimate e = estimate_mle(env, gain(2.0), State{0.9}, MleConfig{});
  EXPECT_LT(e.lambda, 0.0);
  // Fixed point s* = 1/2 is superstable at theta = 2; check a generic one.
  const MleEstimate f = estimate_mle(env, gain(2.5), State{0.9}, MleConfig{});
  EXPECT_NEAR(f.lambda, std::log(std::abs(2.0 - 2.5)), 1e-3);
}

TEST(Lyapunov, SweepMatchesDerivativeOracle) {
  const auto env = EnvModel::make(EnvKind::logistic);
  const std::vector<double> grid{3.3, 3.5, 3.9};
  const auto pts = mle_sweep(env, PolicySpec::linear(), grid, State{0.9}, MleConfig{});
  ASSERT_EQ(pts.size(), 3u);
  for (const auto& p : pts) {
    EXPECT_FALSE(p.error.has_value());
    EXPECT_NEAR(p.estimate.lambda, derivative_oracle(p.theta, 0.9, MleConfig{}), 1e-2);
  }
  // The closed loop is the logistic map: 3.3 and 3.5 sit on the period-2 and
  // period-4 orbits, 3.9 is past the onset of chaos near 3.5699.
  EXPECT_LT(pts[0].estimate.lambda, 0.0);
  EXPECT_LT(pts[1].estimate.lambda, 0.0);
  EXPECT_GT(pts[2].estimate.lambda, 0.0);
}

TEST(Lyapunov, SingletonSweepEqualsDirectEstimate) {
  const auto env = EnvModel::make(EnvKind::logistic);
  const std::vector<double> grid{3.7};
  const auto pts = mle_sweep(env, PolicySpec::linear(), grid, State{0.9}, MleConfig{});
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_EQ(pts[0].estimate.lambda, estimate_mle(env, gain(3.7), State{0.9}, MleConfig{}).lambda);
}

TEST(Lyapunov, HalvingD0IsStable) {
  const auto env = EnvModel::make(EnvKind::logistic);
  for (double theta : {2.5, 3.7, 4.0}) {
    MleConfig a, b;
    b.d0 = a.d0 / 2;
    EXPECT_NEAR(estimate_mle(env, gain(theta), State{0.9}, a).lambda,
                estimate_mle(env, gain(theta), State{0.9}, b).lambda, 5e-3);
  }
}

TEST(Lyapunov, MoreRestartsNeverDecrease) {
  const auto env = EnvModel::make(EnvKind::pendulum);
  RngStream rng(42, StreamTag::init, 0);
  const auto th = ParamVector::random_normal(PolicySpec::tanh_net(2, 1, 8, false), rng, 1.0);
  MleConfig cfg;
  cfg.t_max = 2000;
  double prev = -INFINITY;
  for (std::size_t r : {1u, 2u, 4u, 8u}) {
    cfg.restarts = r;
    const double l = estimate_mle(env, th, env.default_initial_state(), cfg).lambda;
    EXPECT_GE(l, prev);
    prev = l;
  }
}

TEST(Lyapunov, StochasticDeterministicLimit) {
  const auto env = EnvModel::make(EnvKind::sat1d);
  MleConfig cfg;
  cfg.transient_skip = 0;
  cfg.t_max = 40;  // keeps 1.5^t (d0 + noise) far from the clamp
  const MleEstimate e = estimate_mle_stochastic(env, gaussian_gain(1.5, 1e-10), State{0.0}, cfg);
  EXPECT_NEAR(e.lambda, std::log(1.5), 1e-2);
}

TEST(Lyapunov, UniformAffinePolicyEqualsLogGain) {
  const auto env = EnvModel::make(EnvKind::sat1d_shifted);
  MleConfig cfg;
  cfg.transient_skip = 0;
  cfg.t_max = 40;
  const ParamVector th(PolicySpec::uniform(1.0), {1.5, 0.0});
  EXPECT_NEAR(estimate_mle_stochastic(env, th, State{0.0}, cfg).lambda, std::log(1.5), 1e-2);
}

namespace {

// The frictionless hanging rest is a center: the exponent is 0 and a run of
// N counted steps can only report log(sup_n ||M^n||) / N, where M is the
// linearized semi-implicit Euler step. That bound shrinks to 0 with N.
double hanging_rest_stretch_bound(std::size_t n_steps) {
  using namespace pendulum_params;
  const double k = gravity / length;
  const double m[2][2] = {{1.0 - dt * dt * k, dt}, {-dt * k, 1.0}};
  double p[2][2] = {{1.0, 0.0}, {0.0, 1.0}};
  double sup = 1.0;
  for (std::size_t n = 0; n < n_steps; ++n) {
    const double q[2][2] = {{m[0][0] * p[0][0] + m[0][1] * p[1][0], m[0][0] * p[0][1] + m[0][1] * p[1][1]},
                            {m[1][0] * p[0][0] + m[1][1] * p[1][0], m[1][0] * p[0][1] + m[1][1] * p[1][1]}};
    std::copy(&q[0][0], &q[0][0] + 4, &p[0][0]);
    // Spectral norm of a 2x2 matrix.
    const double f = p[0][0] * p[0][0] + p[0][1] * p[0][1] + p[1][0] * p[1][0] + p[1][1] * p[1][1];
    const double det = p[0][0] * p[1][1] - p[0][1] * p[1][0];
    sup = std::max(sup, std::sqrt((f + std::sqrt(std::max(0.0, f * f - 4.0 * det * det))) / 2.0));
  }
  return std::log(sup) / static_cast<double>(n_steps);
}

}  // namespace

TEST(Lyapunov, ConstantPolicyPendulumAtHangingRest) {
  const auto env = EnvModel::make(EnvKind::pendulum);
  const ParamVector th = ParamVector::zeros(PolicySpec::tanh_net(2, 1, 8, true), 0.1);
  const State rest{-std::numbers::pi, 0.0};
  MleConfig cfg;
  cfg.n_paths = 16;
  for (std::size_t t_max : {1000u, 3000u}) {
    cfg.t_max = t_max;
    const double bound = hanging_rest_stretch_bound(t_max - cfg.transient_skip);
    EXPECT_LT(bound, 1.5 / static_cast<double>(t_max - cfg.transient_skip));
    EXPECT_LE(estimate_mle(env, th, rest, cfg).lambda, bound) << t_max;
    EXPECT_LE(estimate_mle_stochastic(env, th, rest, cfg).lambda, bound) << t_max;
  }
}

TEST(Lyapunov, SerialAndParallelAgreeBitwise) {
  const auto env = EnvModel::make(EnvKind::acrobot);
  RngStream rng(43, StreamTag::init, 0);
  const auto th = ParamVector::random_normal(PolicySpec::tanh_net(4, 1, 8, true), rng);
  MleConfig a;
  a.t_max = 600;
  a.n_paths = 4;
  MleConfig b = a;
  b.exec = Exec::serial;
  const State s0 = env.default_initial_state();
  EXPECT_EQ(estimate_mle(env, th, s0, a).restart_lambdas, estimate_mle(env, th, s0, b).restart_lambdas);
  EXPECT_EQ(estimate_mle_stochastic(env, th, s0, a).restart_lambdas,
            estimate_mle_stochastic(env, th, s0, b).restart_lambdas);
}

TEST(Lyapunov, ThresholdCriterion) {
  EXPECT_TRUE(exceeds_discount_threshold(0.2, 0.9));
  EXPECT_FALSE(exceeds_discount_threshold(0.1, 0.9));
  EXPECT_FALSE(exceeds_discount_threshold(-INFINITY, 0.99));
}

TEST(Lyapunov, ConfigValidation) {
  const auto env = EnvModel::make(EnvKind::sat1d);
  MleConfig cfg;
  cfg.d0 = 1e-3;
  EXPECT_THROW(estimate_mle(env, gain(1.5), State{0.0}, cfg), Error);
  cfg = MleConfig{};
  cfg.t_max = cfg.transient_skip;
  EXPECT_THROW(estimate_mle(env, gain(1.5), State{0.0}, cfg), Error);
  EXPECT_THROW(mle_sweep(env, PolicySpec::tanh_net(1, 1, 2, false), std::vector<double>{1.0}, State{0.0}, MleConfig{}),
               Error);
}

TEST(Lyapunov, FixedDirectionIsHonoured) {
  const auto env = EnvModel::make(EnvKind::sat1d_shifted);
  MleConfig cfg;
  cfg.transient_skip = 0;
  cfg.t_max = 40;
  cfg.restarts = 1;
  cfg.direction = std::vector<double>{-1.0};
  // Pushing below 0 is clamped away: every window is censored.
  const MleEstimate e = estimate_mle(env, gain(1.5), State{0.0}, cfg);
  EXPECT_TRUE(e.censored);
  cfg.direction = std::vector<double>{1.0};
  EXPECT_NEAR(estimate_mle(env, gain(1.5), State{0.0}, cfg).lambda, std::log(1.5), 1e-3);
}
