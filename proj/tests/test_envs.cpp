#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "fractalscape/envs.hpp"
#include "fractalscape/error.hpp"
#include "fractalscape/rng.hpp"

using namespace fractalscape;

namespace {

const EnvKind kAll[] = {EnvKind::logistic, EnvKind::sat1d, EnvKind::sat1d_shifted, EnvKind::pendulum,
                        EnvKind::acrobot};

std::vector<double> uniform_in(RngStream& rng, const std::vector<double>& lo, const std::vector<double>& hi) {
  std::vector<double> x(lo.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = lo[i] + rng.uniform() * (hi[i] - lo[i]);
  return x;
}

bool inside(const EnvModel& env, const State& s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (env.is_angle(i)) {
      if (s[i] < -std::numbers::pi || s[i] >= std::numbers::pi) return false;
    } else if (s[i] < env.state_lo()[i] || s[i] > env.state_hi()[i]) {
      return false;
    }
  }
  return true;
}

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

TEST(Envs, LogisticStepExample) {
  const auto env = EnvModel::make(EnvKind::logistic);
  const double a = 3.5 * 0.9;
  const State s = env.step(State{0.9}, Action{a});
  EXPECT_NEAR(s[0], 0.315, 1e-15);
}

TEST(Envs, Sat1dSaturates) {
  const auto env = EnvModel::make(EnvKind::sat1d);
  EXPECT_EQ(env.step(State{0.3}, Action{1.7})[0], 1.0);
  EXPECT_EQ(env.step(State{0.3}, Action{-2.5})[0], -1.0);
  EXPECT_EQ(env.step(State{0.3}, Action{0.25})[0], 0.25);
}

TEST(Envs, Sat1dShiftedUsesNonNegativeBranch) {
  const auto env = EnvModel::make(EnvKind::sat1d_shifted);
  EXPECT_EQ(env.step(State{0.5}, Action{0.4})[0], 0.4);
  EXPECT_EQ(env.step(State{0.5}, Action{3.0})[0], 1.0);
  EXPECT_EQ(env.step(State{0.5}, Action{-1.0})[0], 0.0);
}

TEST(Envs, PendulumUprightIsFixedPoint) {
  const auto env = EnvModel::make(EnvKind::pendulum);
  const State s = env.step(State{0.0, 0.0}, Action{0.0});
  EXPECT_EQ(s[0], 0.0);
  EXPECT_EQ(s[1], 0.0);
}

TEST(Envs, UnforcedEquilibriaAreFixedPoints) {
  const double pi = std::numbers::pi;
  const std::vector<std::pair<EnvKind, State>> cases = {
      {EnvKind::pendulum, {0.0, 0.0}},
      {EnvKind::pendulum, {-pi, 0.0}},
      {EnvKind::acrobot, {0.0, 0.0, 0.0, 0.0}},
      {EnvKind::acrobot, {-pi, 0.0, 0.0, 0.0}},
  };
  for (const auto& [kind, s] : cases) {
    const auto env = EnvModel::make(kind);
    State next = env.step(s, Action{0.0});
    std::vector<double> d(s.size());
    env.difference(next, s, d);
    EXPECT_LE(norm(d), 1e-12) << env.name();
  }
}

TEST(Envs, CostExamples) {
  EXPECT_DOUBLE_EQ(EnvModel::make(EnvKind::pendulum).cost(State{-1.0, 0.0}, Action{0.0}), 1.0);
  EXPECT_EQ(EnvModel::make(EnvKind::sat1d).cost(State{0.0}, Action{3.0}), 0.0);
  EXPECT_DOUBLE_EQ(EnvModel::make(EnvKind::acrobot).cost(State{1.0, 0.0, 0.0, 0.0}, Action{2.0}), 1.02);
  EXPECT_DOUBLE_EQ(EnvModel::make(EnvKind::logistic).cost(State{0.5}, Action{2.0}), 0.25 + 0.4);
  EXPECT_DOUBLE_EQ(EnvModel::make(EnvKind::sat1d_shifted).cost(State{0.25}, Action{1.0}), 1.25);
  EXPECT_DOUBLE_EQ(EnvModel::make(EnvKind::pendulum).cost(State{0.5, 2.0}, Action{1.0}), 0.25 + 0.4 + 0.001);
}

TEST(Envs, ProjectExamples) {
  EXPECT_EQ(EnvModel::make(EnvKind::sat1d).project(State{1.3})[0], 1.0);
  const State p = EnvModel::make(EnvKind::pendulum).project(State{1.5 * std::numbers::pi, 0.0});
  EXPECT_NEAR(p[0], -0.5 * std::numbers::pi, 1e-15);
  EXPECT_EQ(EnvModel::make(EnvKind::logistic).project(State{0.315})[0], 0.315);
  EXPECT_EQ(wrap_angle(std::numbers::pi), -std::numbers::pi);
}

TEST(Envs, ClosureOverRandomStateActionPairs) {
  for (EnvKind kind : kAll) {
    const auto env = EnvModel::make(kind);
    RngStream rng(11, StreamTag::rollout, static_cast<std::uint64_t>(kind));
    for (int i = 0; i < 10000; ++i) {
      const State s = env.project(uniform_in(rng, env.state_lo(), env.state_hi()));
      const Action a = uniform_in(rng, env.action_lo(), env.action_hi());
      const State next = env.step(s, a);
      ASSERT_TRUE(inside(env, next)) << env.name();
    }
  }
}

TEST(Envs, CostIsNonNegativeAndBoundedByM2) {
  for (EnvKind kind : kAll) {
    const auto env = EnvModel::make(kind);
    RngStream rng(12, StreamTag::rollout, static_cast<std::uint64_t>(kind));
    for (int i = 0; i < 10000; ++i) {
      const State s = env.project(uniform_in(rng, env.state_lo(), env.state_hi()));
      const Action a = uniform_in(rng, env.action_lo(), env.action_hi());
      const double c = env.cost(s, a);
      ASSERT_GE(c, 0.0);
      ASSERT_LE(c, env.cost_bound()) << env.name();
    }
  }
}

TEST(Envs, StepIsDeterministic) {
  for (EnvKind kind : kAll) {
    const auto env = EnvModel::make(kind);
    RngStream rng(13, StreamTag::rollout, 0);
    for (int i = 0; i < 100; ++i) {
      const State s = env.project(uniform_in(rng, env.state_lo(), env.state_hi()));
      const Action a = uniform_in(rng, env.action_lo(), env.action_hi());
      const State x = env.step(s, a);
      const State y = env.step(s, a);
      ASSERT_EQ(x, y);
    }
  }
}

TEST(Envs, LocalLipschitzSpotCheck) {
  for (EnvKind kind : kAll) {
    const auto env = EnvModel::make(kind);
    if (kind == EnvKind::sat1d_shifted) continue;  // f(s, a) ignores s; covered by sat1d
    RngStream rng(14, StreamTag::rollout, static_cast<std::uint64_t>(kind));
    const std::size_t n = env.state_dim();
    for (int i = 0; i < 1000; ++i) {
      const State s = env.project(uniform_in(rng, env.state_lo(), env.state_hi()));
      State s2 = s;
      for (std::size_t j = 0; j < n; ++j) s2[j] += (rng.uniform() - 0.5) * 1e-6 / std::sqrt(double(n));
      s2 = env.project(s2);
      const Action a = uniform_in(rng, env.action_lo(), env.action_hi());
      std::vector<double> din(n), dout(n);
      env.difference(s2, s, din);
      env.difference(env.step(s2, a), env.step(s, a), dout);
      ASSERT_LE(norm(dout), env.lipschitz_bound() * norm(din) + 1e-15) << env.name();
    }
  }
}

TEST(Envs, NonFiniteStateIsReported) {
  const auto env = EnvModel::make(EnvKind::pendulum);
  try {
    env.step(State{NAN, 0.0}, Action{0.0});
    FAIL() << "expected NonFiniteState";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::non_finite_state);
  }
}

TEST(Envs, NamesRoundTrip) {
  for (EnvKind kind : kAll) {
    const auto env = EnvModel::make(kind);
    EXPECT_EQ(EnvModel::from_name(env.name()).kind(), kind);
  }
  EXPECT_THROW(EnvModel::from_name("hopper"), Error);
}

TEST(Envs, DefaultInitialStates) {
  EXPECT_EQ(EnvModel::make(EnvKind::pendulum).default_initial_state(), (State{-1.0, 0.0}));
  EXPECT_EQ(EnvModel::make(EnvKind::acrobot).default_initial_state(), (State{1.0, 0.0, 0.0, 0.0}));
  EXPECT_EQ(EnvModel::make(EnvKind::logistic).default_initial_state(), (State{0.9}));
}
