#include "fractalscape/holder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fractalscape/error.hpp"
#include "fractalscape/rng.hpp"

namespace fractalscape {

std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
  require(lo > 0.0 && hi > lo && count >= 2, "log_spaced needs 0 < lo < hi and count >= 2");
  std::vector<double> out(count);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

void HolderConfig::validate() const {
  require(sigma_grid.size() >= 4, "sigma grid needs at least 4 points");
  require(sigma_grid.front() > 0.0, "sigma grid must be positive");
  require(std::adjacent_find(sigma_grid.begin(), sigma_grid.end(), std::greater_equal<>()) == sigma_grid.end(),
          "sigma grid must be strictly increasing");
  require(n_samples >= 30, "need at least 30 samples per sigma");
}

std::string to_string(Smoothness s) {
  switch (s) {
    case Smoothness::smooth: return "smooth";
    case Smoothness::fractal: return "fractal";
    case Smoothness::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

Smoothness classify(double slope, double r_squared) {
  using namespace holder_thresholds;
  if (!(r_squared >= min_r_squared)) return Smoothness::inconclusive;
  if (slope >= smooth_slope) return Smoothness::smooth;
  if (slope <= fractal_slope) return Smoothness::fractal;
  return Smoothness::inconclusive;
}

std::vector<double> sample_objective(const Objective& objective, std::span<const double> theta0, double sigma,
                                     std::size_t n, std::uint64_t seed, std::span<const std::size_t> frozen,
                                     Exec exec) {
  require(sigma > 0.0, "sigma must be positive");
  std::vector<double> values(n);
  for_each_index(n, exec, [&](std::size_t i) {
    RngStream rng(seed, StreamTag::holder, i);
    std::vector<double> x(theta0.begin(), theta0.end());
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double z = rng.normal();
      if (std::find(frozen.begin(), frozen.end(), j) == frozen.end()) x[j] += sigma * z;
    }
    values[i] = objective(x);
  });
  return values;
}

double sample_variance(std::span<const double> values) {
  require(values.size() >= 2, "sample variance needs at least two values");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(values.size() - 1);
}

VariancePoint variance_at_sigma(const Objective& objective, std::span<const double> theta0, double sigma,
                                std::size_t n, std::uint64_t seed, std::span<const std::size_t> frozen,
                                Exec exec) {
  require(n >= 2, "need at least two samples");
  const auto values = sample_objective(objective, theta0, sigma, n, seed, frozen, exec);
  VariancePoint p;
  p.sigma = sigma;
  p.variance = sample_variance(values);
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  p.j_min = *lo;
  p.j_max = *hi;
  p.degenerate = (*lo == *hi) || !(p.variance > 0.0);
  return p;
}

HolderFit fit_holder(std::span<const VariancePoint> pairs) {
  HolderFit fit;
  fit.pairs.assign(pairs.begin(), pairs.end());
  std::vector<double> xs, ys;
  for (const auto& p : pairs) {
    if (p.degenerate || !(p.variance > 0.0) || !(p.sigma > 0.0)) {
      fit.warnings.push_back("sigma " + std::to_string(p.sigma) + ": zero variance, dropped");
      continue;
    }
    xs.push_back(std::log(p.sigma));
    ys.push_back(std::log(p.variance));
  }
  if (xs.size() < 4) {
    throw Error(ErrorKind::insufficient_points,
                "Hoelder fit needs 4 non-degenerate sigma points, got " + std::to_string(xs.size()));
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  fit.alpha = fit.slope / 2.0;
  fit.classification = classify(fit.slope, fit.r_squared);
  return fit;
}

HolderFit estimate_holder(const Objective& objective, std::span<const double> theta0, const HolderConfig& cfg,
                          std::optional<double> tail_bound) {
  cfg.validate();
  std::vector<VariancePoint> pairs;
  pairs.reserve(cfg.sigma_grid.size());
  for (std::size_t k = 0; k < cfg.sigma_grid.size(); ++k) {
    pairs.push_back(variance_at_sigma(objective, theta0, cfg.sigma_grid[k], cfg.n_samples,
                                      derive_seed(cfg.master_seed, k), cfg.frozen, cfg.exec));
  }
  HolderFit fit = fit_holder(pairs);
  if (tail_bound) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& p : pairs) {
      lo = std::min(lo, p.j_min);
      hi = std::max(hi, p.j_max);
    }
    if (fit.classification == Smoothness::fractal && *tail_bound > holder_thresholds::max_tail_fraction * (hi - lo)) {
      fit.classification = Smoothness::inconclusive;
      fit.warnings.push_back("truncation tail bound exceeds 1% of the observed J range");
    }
  }
  return fit;
}

}  // namespace fractalscape
