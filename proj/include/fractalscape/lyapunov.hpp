#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fractalscape/envs.hpp"
#include "fractalscape/parallel.hpp"
#include "fractalscape/policies.hpp"

namespace fractalscape {

struct MleConfig {
  double d0 = 1e-8;
  /// Separation at which the perturbed trajectory is pulled back to d0.
  double renorm_threshold = 1e-4;
  /// Separations below d0 * collapse_ratio are also renormalized so that the
  /// difference never sinks into rounding noise on contracting maps.
  double collapse_ratio = 1e-3;
  std::size_t window = 50;
  std::size_t t_max = 10000;
  std::size_t transient_skip = 100;
  std::size_t n_paths = 64;
  std::size_t restarts = 8;
  /// Fixed initial perturbation direction; random per restart when empty.
  std::optional<std::vector<double>> direction;
  std::uint64_t seed = 0;
  Exec exec = Exec::parallel;

  void validate() const;
};

struct MleEstimate {
  /// Nats per step; -inf when no window produced a non-zero separation.
  double lambda = 0.0;
  std::vector<double> window_logs;
  std::size_t n_renorms = 0;
  std::size_t steps_counted = 0;
  /// Some windows ended with zero separation (e.g. both trajectories clamped
  /// to the same boundary) and were left out of the average.
  bool censored = false;
  /// Per-restart estimates; lambda is their maximum.
  std::vector<double> restart_lambdas;
};

/// Benettin two-trajectory estimate of the maximal Lyapunov exponent of
/// s -> step(s, u(s)) (mean action). After transient_skip steps of the
/// reference trajectory a twin is placed at distance d0; the accumulated
/// log-stretch over renormalization windows divided by the counted steps is
/// the estimate. Reports the maximum over restarts.
MleEstimate estimate_mle(const EnvModel& env, const ParamVector& theta, std::span<const double> s0,
                         const MleConfig& cfg);

/// Stochastic-policy variant: n_paths coupled pairs share their action noise,
/// and the stretch of each window is measured on the norm of the mean
/// separation across paths.
MleEstimate estimate_mle_stochastic(const EnvModel& env, const ParamVector& theta,
                                    std::span<const double> s0, const MleConfig& cfg);

struct MleSweepPoint {
  double theta = 0.0;
  MleEstimate estimate;
  /// Set when this grid point failed; the sweep carries on.
  std::optional<std::string> error;
};

/// estimate_mle at every grid value of a one-parameter policy family.
std::vector<MleSweepPoint> mle_sweep(const EnvModel& env, const PolicySpec& spec, std::span<const double> grid,
                                     std::span<const double> s0, const MleConfig& cfg);

/// lambda > -log(gamma): the regime where smoothness of J is no longer guaranteed.
inline bool exceeds_discount_threshold(double lambda, double gamma) { return lambda > -std::log(gamma); }

}  // namespace fractalscape
