#pragma once

#include <cstdint>
#include <vector>

#include "fractalscape/envs.hpp"
#include "fractalscape/parallel.hpp"
#include "fractalscape/policies.hpp"

namespace fractalscape {

enum class Baseline { mean_return, none };

struct GradConfig {
  std::size_t n_episodes = 256;
  double gamma = 0.99;
  std::size_t horizon = 1000;
  State s0;
  Baseline baseline = Baseline::mean_return;
  /// Weight the score term by gamma^t (discounted state visitation).
  bool discounted_visitation = true;
  std::uint64_t master_seed = 0;
  Exec exec = Exec::parallel;

  void validate() const;
};

struct GradEstimate {
  std::vector<double> eta;
  double norm = 0.0;
  std::size_t n_episodes = 0;
};

/// One sampled episode reduced to what the estimator needs.
struct Episode {
  std::vector<double> costs;
  /// scores[t] = grad log pi(a_t | s_t)
  std::vector<std::vector<double>> scores;
};

/// G_t = sum_{k >= t} gamma^{k - t} c_k.
std::vector<double> reward_to_go(std::span<const double> costs, double gamma);

/// Per-timestep baseline: mean reward-to-go across episodes (mean_return) or
/// zeros (none). `returns[e]` is the reward-to-go of episode e.
std::vector<double> baseline_value(std::span<const std::vector<double>> returns, Baseline baseline);

/// eta = (1/n) sum_e sum_t w_t score_t (G_t - b_t), w_t = gamma^t or 1.
/// Costs are minimized, so -eta is the descent direction.
GradEstimate gradient_from_episodes(std::span<const Episode> episodes, const GradConfig& cfg);

/// Samples cfg.n_episodes Gaussian-policy episodes (substream (seed, grad, e))
/// and applies gradient_from_episodes. Episodes run in parallel; the sum is
/// reduced in episode order.
GradEstimate estimate_gradient(const EnvModel& env, const ParamVector& theta, const GradConfig& cfg);

}  // namespace fractalscape
