#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "fractalscape/envs.hpp"
#include "fractalscape/policies.hpp"
#include "fractalscape/rollout.hpp"

namespace fractalscape {

struct ScanResult {
  std::vector<double> theta0;
  std::vector<double> direction;
  std::vector<double> deltas;
  /// NaN where the evaluation failed; see gaps.
  std::vector<double> j_values;
  std::vector<std::size_t> gaps;
  double gamma = 0.0;
  /// Single stochastic sample path instead of the deterministic policy.
  bool stochastic_path = false;
  double tail_bound = 0.0;
};

struct SweepResult {
  std::vector<double> theta_grid;
  std::vector<double> j_values;
  std::vector<std::size_t> gaps;
  double gamma = 0.0;
  double tail_bound = 0.0;
};

struct Roughness {
  double total_variation = 0.0;
  double max_second_divided_difference = 0.0;
};

/// J at theta0 + i * step_size * direction for i in [0, n_steps). Uses the
/// deterministic policy unless cfg.mode is stochastic, in which case every
/// point follows sample path 0 with common random numbers.
ScanResult scan(const EnvModel& env, const ParamVector& theta0, std::span<const double> direction,
                std::size_t n_steps, double step_size, const RolloutConfig& cfg);

/// Deterministic J on a uniform grid of the single parameter of a
/// one-parameter policy family.
SweepResult sweep(const EnvModel& env, const PolicySpec& spec, double lo, double hi, std::size_t n_points,
                  const RolloutConfig& cfg);

/// TV = sum |J_{i+1} - J_i| and the largest |second divided difference| over
/// interior points. Throws insufficient_points with fewer than 3 points.
Roughness roughness(std::span<const double> xs, std::span<const double> ys);
inline Roughness roughness(const SweepResult& r) { return roughness(r.theta_grid, r.j_values); }
inline Roughness roughness(const ScanResult& r) { return roughness(r.deltas, r.j_values); }

/// Scan CSV: header `delta,J,tail_bound`, 17 significant digits.
void write_scan_csv(std::ostream& out, const ScanResult& r);
/// Sweep CSV: header `theta,J,tail_bound`, 17 significant digits.
void write_sweep_csv(std::ostream& out, const SweepResult& r);

}  // namespace fractalscape
