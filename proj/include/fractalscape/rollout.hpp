#pragma once

#include <cstdint>
#include <vector>

#include "fractalscape/envs.hpp"
#include "fractalscape/parallel.hpp"
#include "fractalscape/policies.hpp"

namespace fractalscape {

enum class EvalMode { deterministic, stochastic };

struct RolloutConfig {
  double gamma = 0.99;
  std::size_t horizon = 1000;
  State s0;
  EvalMode mode = EvalMode::deterministic;
  std::size_t n_paths = 16;
  std::uint64_t master_seed = 0;
  /// Reuse identical action noise across different parameter vectors.
  bool common_random_numbers = true;
  Exec exec = Exec::parallel;

  /// Checks 0 < gamma < 1, horizon >= 1, n_paths >= 1.
  void validate() const;
};

struct Trajectory {
  std::vector<State> states;    // horizon + 1
  std::vector<Action> actions;  // applied (clamped to A)
  std::vector<double> costs;
  /// Unclamped sampled actions, stochastic mode only.
  std::vector<Action> sampled_actions;
  /// grad log pi(a_t | s_t), stochastic Gaussian mode only.
  std::vector<std::vector<double>> scores;

  double discounted_cost(double gamma) const;
};

struct RolloutOptions {
  bool record_scores = true;
};

/// Generates exactly cfg.horizon transitions from cfg.s0. Deterministic mode
/// always plays the mean action; stochastic mode draws action noise from the
/// stream keyed by (master_seed, path_seed) and, without common random
/// numbers, by the parameter values too.
Trajectory rollout(const EnvModel& env, const ParamVector& theta, const RolloutConfig& cfg,
                   std::uint64_t path_seed, RolloutOptions options = {});

/// sum_t gamma^t c_t accumulated backwards (Horner), so that
/// discounted_sum(c[0..T)) == c[0] + gamma * discounted_sum(c[1..T)) bitwise.
double discounted_sum(std::span<const double> costs, double gamma);

/// sum_{t < T} gamma^t c(s_t, u(s_t)) from s with the mean action. This is the
/// hot path used by landscape and Hoelder sampling.
double discounted_cost(const EnvModel& env, const ParamVector& theta, std::span<const double> s,
                       double gamma, std::size_t horizon);

/// Discounted cost of one stochastic sample path.
double discounted_cost_path(const EnvModel& env, const ParamVector& theta, const RolloutConfig& cfg,
                            std::uint64_t path_seed);

/// J(theta): the discounted cost (deterministic) or its mean over n_paths
/// sample paths, reduced in path-index order.
double objective(const EnvModel& env, const ParamVector& theta, const RolloutConfig& cfg);

/// V(s) under the deterministic policy, truncated at cfg.horizon.
double state_value(const EnvModel& env, const ParamVector& theta, std::span<const double> s,
                   const RolloutConfig& cfg);

/// c(s, a) + gamma V_{T-1}(step(s, a)), so that q_value(s, u(s)) equals
/// state_value(s) bitwise.
double q_value(const EnvModel& env, const ParamVector& theta, std::span<const double> s,
               std::span<const double> a, const RolloutConfig& cfg);

/// |V'(s0) - V(s0) - sum_t gamma^t (Q(s'_t, u'(s'_t)) - V(s'_t))| where primes
/// refer to theta_prime and its trajectory. With the truncated V and Q the
/// residual is bounded by 2 * tail_bound.
double performance_difference_residual(const EnvModel& env, const ParamVector& theta, const ParamVector& theta_prime,
                       const RolloutConfig& cfg);

/// M2 gamma^T / (1 - gamma): the error from truncating the discounted series.
double tail_bound(const EnvModel& env, double gamma, std::size_t horizon);

}  // namespace fractalscape
