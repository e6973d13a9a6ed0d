#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fractalscape/error.hpp"
#include "fractalscape/policygrad.hpp"
#include "fractalscape/rng.hpp"
#include "fractalscape/rollout.hpp"

using namespace fractalscape;

namespace {

GradConfig pendulum_config(std::size_t episodes, std::size_t horizon, double gamma = 0.9) {
  GradConfig c;
  c.n_episodes = episodes;
  c.horizon = horizon;
  c.gamma = gamma;
  c.s0 = EnvModel::make(EnvKind::pendulum).default_initial_state();
  return c;
}

ParamVector pendulum_theta(std::uint64_t seed = 0) {
  RngStream rng(seed, StreamTag::init, 0);
  return ParamVector::random_normal(PolicySpec::tanh_net(2, 1, 8, true), rng);
}

// One-step Gaussian-quadratic toy: a = mu + z, cost a^2, score d/dmu = z.
std::vector<Episode> quadratic_episodes(double mu, std::size_t n, std::uint64_t seed, double cost_scale = 1.0) {
  RngStream rng(seed, StreamTag::grad, 0);
  std::vector<Episode> eps(n);
  for (auto& e : eps) {
    const double z = rng.normal();
    e.costs = {cost_scale * (mu + z) * (mu + z)};
    e.scores = {{z}};
  }
  return eps;
}

}  // namespace

TEST(PolicyGrad, RewardToGo) {
  const auto g = reward_to_go(std::vector<double>{1.0, 2.0, 4.0}, 0.5);
  EXPECT_EQ(g, (std::vector<double>{1.0 + 0.5 * (2.0 + 0.5 * 4.0), 2.0 + 0.5 * 4.0, 4.0}));
}

TEST(PolicyGrad, BaselineExamples) {
  const std::vector<std::vector<double>> one{{3.0, 1.0}};
  EXPECT_EQ(baseline_value(one, Baseline::mean_return), one[0]);
  const std::vector<std::vector<double>> sym{{2.5}, {-2.5}};
  EXPECT_EQ(baseline_value(sym, Baseline::mean_return)[0], 0.0);
  EXPECT_EQ(baseline_value(sym, Baseline::none)[0], 0.0);
  EXPECT_THROW(baseline_value(std::span<const std::vector<double>>{}, Baseline::none), Error);
}

TEST(PolicyGrad, SymmetricReturnsGiveSignedAdvantages) {
  std::vector<Episode> eps(2);
  eps[0] = {{2.0}, {{1.0}}};
  eps[1] = {{-2.0}, {{1.0}}};
  GradConfig c;
  c.gamma = 0.5;
  // Advantages +2 and -2 with equal scores cancel.
  EXPECT_EQ(gradient_from_episodes(eps, c).eta[0], 0.0);
  eps[1].scores = {{-1.0}};
  EXPECT_EQ(gradient_from_episodes(eps, c).eta[0], 2.0);
}

TEST(PolicyGrad, ZeroCostGivesZeroGradient) {
  RngStream rng(61, StreamTag::grad, 0);
  std::vector<Episode> eps(10);
  for (auto& e : eps) {
    e.costs.assign(5, 0.0);
    for (int t = 0; t < 5; ++t) e.scores.push_back({rng.normal(), rng.normal()});
  }
  GradConfig c;
  for (Baseline b : {Baseline::mean_return, Baseline::none}) {
    c.baseline = b;
    const GradEstimate g = gradient_from_episodes(eps, c);
    EXPECT_EQ(g.eta, (std::vector<double>{0.0, 0.0}));
    EXPECT_EQ(g.norm, 0.0);
  }
}

TEST(PolicyGrad, SingleEpisodeWithMeanBaselineIsZero) {
  const auto env = EnvModel::make(EnvKind::pendulum);
  const GradEstimate g = estimate_gradient(env, pendulum_theta(), pendulum_config(1, 100));
  for (double x : g.eta) EXPECT_EQ(x, 0.0);
}

TEST(PolicyGrad, IdenticalEpisodesGiveZero) {
  std::vector<Episode> eps(4, Episode{{1.0, 3.0}, {{0.5}, {-1.5}}});
  GradConfig c;
  EXPECT_EQ(gradient_from_episodes(eps, c).eta[0], 0.0);
}

TEST(PolicyGrad, GaussianQuadraticClosedForm) {
  // d/dmu E[(mu + z)^2] = 2 mu.
  const double mu = 1.0;
  const std::size_t n = 10000;
  const auto eps = quadratic_episodes(mu, n, 7);
  for (Baseline b : {Baseline::none, Baseline::mean_return}) {
    GradConfig c;
    c.baseline = b;
    const double eta = gradient_from_episodes(eps, c).eta[0];
    // Standard error from the per-episode terms of the estimator.
    double base = 0.0;
    if (b == Baseline::mean_return) {
      for (const auto& e : eps) base += e.costs[0];
      base /= double(n);
    }
    double m = 0.0, m2 = 0.0;
    for (const auto& e : eps) {
      const double term = e.scores[0][0] * (e.costs[0] - base);
      m += term;
      m2 += term * term;
    }
    m /= double(n);
    const double se = std::sqrt((m2 / double(n) - m * m) / double(n));
    EXPECT_NEAR(eta, 2.0 * mu, 3.0 * se);
  }
}

TEST(PolicyGrad, CostScalingIsExactForPowersOfTwo) {
  const auto eps = quadratic_episodes(0.3, 500, 9);
  const auto scaled = quadratic_episodes(0.3, 500, 9, 4.0);
  GradConfig c;
  EXPECT_EQ(gradient_from_episodes(scaled, c).eta[0], 4.0 * gradient_from_episodes(eps, c).eta[0]);
  const auto tripled = quadratic_episodes(0.3, 500, 9, 3.0);
  EXPECT_NEAR(gradient_from_episodes(tripled, c).eta[0], 3.0 * gradient_from_episodes(eps, c).eta[0], 1e-12);
}

TEST(PolicyGrad, ReproducibleAndThreadIndependent) {
  const auto env = EnvModel::make(EnvKind::pendulum);
  const auto th = pendulum_theta(2);
  GradConfig c = pendulum_config(64, 200);
  c.master_seed = 5;
  const GradEstimate a = estimate_gradient(env, th, c);
  EXPECT_EQ(a.eta, estimate_gradient(env, th, c).eta);
  GradConfig s = c;
  s.exec = Exec::serial;
  EXPECT_EQ(a.eta, estimate_gradient(env, th, s).eta);
  c.master_seed = 6;
  EXPECT_NE(a.eta, estimate_gradient(env, th, c).eta);
}

TEST(PolicyGrad, BaselineInvarianceInExpectation) {
  const auto env = EnvModel::make(EnvKind::pendulum);
  const auto th = pendulum_theta(3);
  const std::size_t p = th.size();
  const int seeds = 20;
  std::vector<std::vector<double>> with(seeds), without(seeds);
  for (int k = 0; k < seeds; ++k) {
    GradConfig c = pendulum_config(64, 60);
    c.master_seed = 100 + k;
    with[k] = estimate_gradient(env, th, c).eta;
    c.baseline = Baseline::none;
    without[k] = estimate_gradient(env, th, c).eta;
  }
  auto mean_var = [&](const std::vector<std::vector<double>>& xs, std::size_t j) {
    double m = 0.0, v = 0.0;
    for (const auto& x : xs) m += x[j];
    m /= seeds;
    for (const auto& x : xs) v += (x[j] - m) * (x[j] - m);
    return std::pair{m, v / (seeds - 1)};
  };
  for (std::size_t j = 0; j < p; ++j) {
    const auto [ma, va] = mean_var(with, j);
    const auto [mb, vb] = mean_var(without, j);
    const double pooled_se = std::sqrt(va / seeds + vb / seeds);
    EXPECT_LE(std::abs(ma - mb), 3.0 * pooled_se + 1e-15) << "coordinate " << j;
  }
}

TEST(PolicyGrad, SmoothedObjectiveAlignment) {
  // Oracle: antithetic Gaussian-smoothing gradient of the deterministic J,
  // E[(J(theta + s z) - J(theta - s z)) z] / (2 s), the central difference of
  // the smoothed objective along every sampled direction.
  const auto env = EnvModel::make(EnvKind::pendulum);
  const auto th = pendulum_theta(4);
  const std::size_t p = th.size();
  const std::size_t slot = *th.log_sigma_index();
  const double gamma = 0.9, s_fd = 1e-3;
  const std::size_t horizon = 200;
  const State s0 = env.default_initial_state();
  const int n = 10000;

  std::vector<std::vector<double>> terms(n, std::vector<double>(p, 0.0));
  for_each_index(n, Exec::parallel, [&](std::size_t k) {
    RngStream rng(11, StreamTag::smoothing, k);
    std::vector<double> z(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) z[j] = j == slot ? 0.0 : rng.normal();
    std::vector<double> up(th.values().begin(), th.values().end()), dn = up;
    for (std::size_t j = 0; j < p; ++j) {
      up[j] += s_fd * z[j];
      dn[j] -= s_fd * z[j];
    }
    const double diff = discounted_cost(env, th.with_values(up), s0, gamma, horizon) -
                        discounted_cost(env, th.with_values(dn), s0, gamma, horizon);
    for (std::size_t j = 0; j < p; ++j) terms[k][j] = diff * z[j] / (2.0 * s_fd);
  });
  std::vector<double> oracle(p, 0.0);
  for (const auto& t : terms) {
    for (std::size_t j = 0; j < p; ++j) oracle[j] += t[j] / n;
  }

  GradConfig c = pendulum_config(4096, horizon, gamma);
  std::vector<double> eta = estimate_gradient(env, th, c).eta;
  eta[slot] = 0.0;
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    dot += eta[j] * oracle[j];
    na += eta[j] * eta[j];
    nb += oracle[j] * oracle[j];
  }
  const double cosine = dot / std::sqrt(na * nb);
  EXPECT_GE(cosine, 0.5);
}

TEST(PolicyGrad, UndiscountedVisitationChangesWeights) {
  std::vector<Episode> eps(2);
  eps[0] = {{0.0, 1.0}, {{0.0}, {1.0}}};
  eps[1] = {{0.0, -1.0}, {{0.0}, {-1.0}}};
  GradConfig c;
  c.gamma = 0.5;
  EXPECT_EQ(gradient_from_episodes(eps, c).eta[0], 0.5);
  c.discounted_visitation = false;
  EXPECT_EQ(gradient_from_episodes(eps, c).eta[0], 1.0);
}

TEST(PolicyGrad, DegenerateDensityAtZeroSigma) {
  const auto env = EnvModel::make(EnvKind::pendulum);
  ParamVector th = pendulum_theta();
  th.set_log_sigma(-INFINITY);
  try {
    estimate_gradient(env, th, pendulum_config(4, 10));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate_density);
  }
}
