#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fractalscape/parallel.hpp"

namespace fractalscape {

/// J evaluated at a flat parameter vector.
using Objective = std::function<double(std::span<const double>)>;

/// `count` log-spaced points from lo to hi inclusive.
std::vector<double> log_spaced(double lo, double hi, std::size_t count);

struct HolderConfig {
  std::vector<double> sigma_grid = log_spaced(1e-5, 1e-2, 12);
  std::size_t n_samples = 200;
  std::uint64_t master_seed = 0;
  /// Coordinates excluded from perturbation (e.g. the log-sigma slot).
  std::vector<std::size_t> frozen;
  Exec exec = Exec::parallel;

  /// Grid strictly increasing with >= 4 positive points, n_samples >= 30.
  void validate() const;
};

enum class Smoothness { smooth, fractal, inconclusive };
std::string to_string(Smoothness s);

struct VariancePoint {
  double sigma = 0.0;
  double variance = 0.0;
  /// All sampled values identical; left out of the regression.
  bool degenerate = false;
  double j_min = 0.0;
  double j_max = 0.0;
};

struct HolderFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double alpha = 0.0;
  Smoothness classification = Smoothness::inconclusive;
  std::vector<VariancePoint> pairs;
  std::vector<std::string> warnings;
};

namespace holder_thresholds {
inline constexpr double smooth_slope = 1.8;
inline constexpr double fractal_slope = 1.5;
inline constexpr double min_r_squared = 0.9;
/// Fractal is never reported when the truncation tail bound exceeds this
/// fraction of the observed J range.
inline constexpr double max_tail_fraction = 0.01;
}  // namespace holder_thresholds

/// Smooth if slope >= 1.8, fractal if slope <= 1.5, inconclusive otherwise or
/// when r_squared < 0.9.
Smoothness classify(double slope, double r_squared);

/// J(theta0 + sigma z_i) for n isotropic standard-normal draws z_i. Sample i
/// uses the substream (seed, holder, i), so the values do not depend on the
/// execution mode or thread count.
std::vector<double> sample_objective(const Objective& objective, std::span<const double> theta0, double sigma,
                                     std::size_t n, std::uint64_t seed, std::span<const std::size_t> frozen = {},
                                     Exec exec = Exec::parallel);

/// Unbiased (n - 1) sample variance, two-pass, in index order.
double sample_variance(std::span<const double> values);

/// Sample variance of J(theta0 + sigma z) over n draws.
VariancePoint variance_at_sigma(const Objective& objective, std::span<const double> theta0, double sigma,
                                std::size_t n, std::uint64_t seed, std::span<const std::size_t> frozen = {},
                                Exec exec = Exec::parallel);

/// Least squares of log Var on log sigma over the non-degenerate pairs.
/// Throws insufficient_points with fewer than 4 of them.
HolderFit fit_holder(std::span<const VariancePoint> pairs);

/// Samples every grid sigma and fits. When tail_bound is given, a fractal
/// verdict is downgraded to inconclusive if the bound exceeds 1% of the
/// observed J range.
HolderFit estimate_holder(const Objective& objective, std::span<const double> theta0, const HolderConfig& cfg,
                          std::optional<double> tail_bound = std::nullopt);

// Validation oracles ---------------------------------------------------------

/// sum_{n < n_terms} a^n cos(b^n pi x). For integer b the phase b^n x mod 2 is
/// reduced exactly from the binary expansion of x, so high-frequency terms
/// keep full precision.
double weierstrass(double x, double a = 0.6, double b = 7.0, int n_terms = 60);

struct CurveSample {
  std::vector<double> xs;
  std::vector<double> ys;
  void validate() const;
};

/// Box-counting dimension of the graph {(x, y)}: the graph is scaled to the
/// unit square, boxes are counted column by column over a dyadic ladder, and
/// the slope of log N vs log(1/eps) is fitted over the middle half of the
/// ladder.
double box_count_dimension(const CurveSample& curve);

}  // namespace fractalscape
