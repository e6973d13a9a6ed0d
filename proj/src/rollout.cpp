#include "fractalscape/rollout.hpp"

#include <array>
#include <bit>
#include <cmath>

#include "fractalscape/error.hpp"

namespace fractalscape {

namespace {

std::uint64_t hash_values(std::span<const double> values) {
  std::uint64_t h = 0x6A09E667F3BCC908ULL;
  for (double v : values) h = mix64(h ^ std::bit_cast<std::uint64_t>(v));
  return h;
}

std::uint64_t path_stream_index(const ParamVector& theta, const RolloutConfig& cfg, std::uint64_t path_seed) {
  return cfg.common_random_numbers ? path_seed : derive_seed(path_seed, hash_values(theta.values()));
}

void check_compatible(const EnvModel& env, const ParamVector& theta, std::span<const double> s) {
  require(theta.spec().state_dim == env.state_dim(), "policy input dimension does not match environment");
  require(theta.spec().action_dim == env.action_dim(), "policy output dimension does not match environment");
  require(s.size() == env.state_dim(), "initial state has wrong dimension");
}

}  // namespace

void RolloutConfig::validate() const {
  require(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0, 1)");
  require(horizon >= 1, "horizon must be at least 1");
  require(n_paths >= 1, "n_paths must be at least 1");
}

double discounted_sum(std::span<const double> costs, double gamma) {
  double total = 0.0;
  for (auto it = costs.rbegin(); it != costs.rend(); ++it) total = *it + gamma * total;
  return total;
}

double Trajectory::discounted_cost(double gamma) const { return discounted_sum(costs, gamma); }

Trajectory rollout(const EnvModel& env, const ParamVector& theta, const RolloutConfig& cfg,
                   std::uint64_t path_seed, RolloutOptions options) {
  cfg.validate();
  const State s0 = cfg.s0.empty() ? env.default_initial_state() : cfg.s0;
  check_compatible(env, theta, s0);

  const bool stochastic = cfg.mode == EvalMode::stochastic && theta.spec().stochastic();
  const bool scores = stochastic && options.record_scores && theta.spec().kind == PolicyKind::tanh_net_gaussian &&
                      theta.sigma() > 0.0;
  RngStream rng(cfg.master_seed, StreamTag::rollout, path_stream_index(theta, cfg, path_seed));

  Trajectory traj;
  traj.states.reserve(cfg.horizon + 1);
  traj.actions.reserve(cfg.horizon);
  traj.costs.reserve(cfg.horizon);
  traj.states.push_back(env.project(s0));

  const std::size_t m = env.action_dim();
  Action raw(m), applied(m);
  std::array<double, kMaxActionDim> noise{};
  const std::span<double> z(noise.data(), noise_dim(theta.spec()));
  for (std::size_t t = 0; t < cfg.horizon; ++t) {
    const State& s = traj.states.back();
    if (stochastic) {
      draw_noise(theta.spec(), rng, z);
      action_from_noise(theta, s, z, raw);
      traj.sampled_actions.push_back(raw);
      if (scores) traj.scores.push_back(score_gradient(theta, s, raw));
    } else {
      mean_action(theta, s, raw);
    }
    env.clamp_action(raw, applied);
    traj.costs.push_back(env.cost(s, applied));
    traj.actions.push_back(applied);
    traj.states.push_back(env.step(s, applied));
  }
  return traj;
}

double discounted_cost(const EnvModel& env, const ParamVector& theta, std::span<const double> s,
                       double gamma, std::size_t horizon) {
  check_compatible(env, theta, s);
  const std::size_t n = env.state_dim(), m = env.action_dim();
  std::array<double, kMaxStateDim> cur{}, next{};
  std::array<double, kMaxActionDim> raw{}, applied{};
  const std::span<double> cur_s(cur.data(), n), next_s(next.data(), n);
  const std::span<double> raw_a(raw.data(), m), app_a(applied.data(), m);
  env.project(s, cur_s);

  std::vector<double> costs(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    mean_action(theta, cur_s, raw_a);
    env.clamp_action(raw_a, app_a);
    costs[t] = env.cost(cur_s, app_a);
    if (t + 1 < horizon) {
      env.step(cur_s, app_a, next_s);
      cur = next;
    }
  }
  return discounted_sum(costs, gamma);
}

double discounted_cost_path(const EnvModel& env, const ParamVector& theta, const RolloutConfig& cfg,
                            std::uint64_t path_seed) {
  const State s0 = cfg.s0.empty() ? env.default_initial_state() : cfg.s0;
  if (cfg.mode == EvalMode::deterministic || !theta.spec().stochastic()) {
    return discounted_cost(env, theta, s0, cfg.gamma, cfg.horizon);
  }
  check_compatible(env, theta, s0);
  const std::size_t n = env.state_dim(), m = env.action_dim();
  std::array<double, kMaxStateDim> cur{}, next{};
  std::array<double, kMaxActionDim> raw{}, applied{}, noise{};
  const std::span<double> cur_s(cur.data(), n), next_s(next.data(), n);
  const std::span<double> raw_a(raw.data(), m), app_a(applied.data(), m);
  const std::span<double> z(noise.data(), noise_dim(theta.spec()));
  env.project(s0, cur_s);
  RngStream rng(cfg.master_seed, StreamTag::rollout, path_stream_index(theta, cfg, path_seed));

  std::vector<double> costs(cfg.horizon);
  for (std::size_t t = 0; t < cfg.horizon; ++t) {
    draw_noise(theta.spec(), rng, z);
    action_from_noise(theta, cur_s, z, raw_a);
    env.clamp_action(raw_a, app_a);
    costs[t] = env.cost(cur_s, app_a);
    env.step(cur_s, app_a, next_s);
    cur = next;
  }
  return discounted_sum(costs, cfg.gamma);
}

double objective(const EnvModel& env, const ParamVector& theta, const RolloutConfig& cfg) {
  cfg.validate();
  const State s0 = cfg.s0.empty() ? env.default_initial_state() : cfg.s0;
  if (cfg.mode == EvalMode::deterministic || !theta.spec().stochastic()) {
    return discounted_cost(env, theta, s0, cfg.gamma, cfg.horizon);
  }
  std::vector<double> per_path(cfg.n_paths);
  for_each_index(cfg.n_paths, cfg.exec, [&](std::size_t i) {
    per_path[i] = discounted_cost_path(env, theta, cfg, i);
  });
  double sum = 0.0;
  for (double v : per_path) sum += v;
  return sum / static_cast<double>(cfg.n_paths);
}

double state_value(const EnvModel& env, const ParamVector& theta, std::span<const double> s,
                   const RolloutConfig& cfg) {
  cfg.validate();
  return discounted_cost(env, theta, s, cfg.gamma, cfg.horizon);
}

double q_value(const EnvModel& env, const ParamVector& theta, std::span<const double> s,
               std::span<const double> a, const RolloutConfig& cfg) {
  cfg.validate();
  check_compatible(env, theta, s);
  const State here = env.project(s);
  Action applied(env.action_dim());
  env.clamp_action(a, applied);
  const double c = env.cost(here, applied);
  if (cfg.horizon == 1) return c;
  const State next = env.step(here, applied);
  return c + cfg.gamma * discounted_cost(env, theta, next, cfg.gamma, cfg.horizon - 1);
}

double performance_difference_residual(const EnvModel& env, const ParamVector& theta, const ParamVector& theta_prime,
                       const RolloutConfig& cfg) {
  cfg.validate();
  RolloutConfig det = cfg;
  det.mode = EvalMode::deterministic;
  const State s0 = cfg.s0.empty() ? env.default_initial_state() : cfg.s0;
  det.s0 = s0;

  const Trajectory primed = rollout(env, theta_prime, det, 0);
  const double lhs = primed.discounted_cost(cfg.gamma) - state_value(env, theta, s0, det);

  std::vector<double> terms(cfg.horizon);
  for_each_index(cfg.horizon, cfg.exec, [&](std::size_t t) {
    const State& s = primed.states[t];
    terms[t] = q_value(env, theta, s, primed.actions[t], det) - state_value(env, theta, s, det);
  });
  return std::abs(lhs - discounted_sum(terms, cfg.gamma));
}

double tail_bound(const EnvModel& env, double gamma, std::size_t horizon) {
  return env.cost_bound() * std::pow(gamma, static_cast<double>(horizon)) / (1.0 - gamma);
}

}  // namespace fractalscape
