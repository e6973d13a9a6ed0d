#include "fractalscape/lyapunov.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "fractalscape/error.hpp"

namespace fractalscape {

namespace {

using Buf = std::array<double, kMaxStateDim>;

double norm(std::span<const double> v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  return std::sqrt(sq);
}

std::vector<double> initial_direction(const MleConfig& cfg, std::size_t dim, std::size_t restart) {
  if (cfg.direction) {
    std::vector<double> d = *cfg.direction;
    require(d.size() == dim, "perturbation direction has wrong dimension");
    const double n = norm(d);
    require(n > 0.0, "perturbation direction must be non-zero");
    for (auto& x : d) x /= n;
    return d;
  }
  RngStream rng(cfg.seed, StreamTag::mle, restart);
  std::vector<double> d(dim);
  double n = 0.0;
  while (n == 0.0) {
    for (auto& x : d) x = rng.normal();
    n = norm(d);
  }
  for (auto& x : d) x /= n;
  return d;
}

// Places `out` at s + scale * dir, projected into S.
void place_twin(const EnvModel& env, std::span<const double> s, std::span<const double> dir, double scale,
                std::span<double> out) {
  Buf raw{};
  for (std::size_t i = 0; i < s.size(); ++i) raw[i] = s[i] + scale * dir[i];
  env.project(std::span<const double>(raw.data(), s.size()), out);
}

void closed_loop_step(const EnvModel& env, const ParamVector& theta, std::span<double> s) {
  std::array<double, kMaxActionDim> a{};
  const std::span<double> as(a.data(), env.action_dim());
  mean_action(theta, s, as);
  Buf next{};
  env.step(s, as, std::span<double>(next.data(), s.size()));
  std::copy_n(next.begin(), s.size(), s.begin());
}

void noisy_step(const EnvModel& env, const ParamVector& theta, std::span<const double> noise, std::span<double> s) {
  std::array<double, kMaxActionDim> a{};
  const std::span<double> as(a.data(), env.action_dim());
  action_from_noise(theta, s, noise, as);
  Buf next{};
  env.step(s, as, std::span<double>(next.data(), s.size()));
  std::copy_n(next.begin(), s.size(), s.begin());
}

struct RestartResult {
  double total = 0.0;
  std::size_t steps = 0;
  std::size_t renorms = 0;
  bool censored = false;
  std::vector<double> window_logs;

  double lambda() const {
    return steps > 0 ? total / static_cast<double>(steps) : -std::numeric_limits<double>::infinity();
  }
};

void check_inputs(const EnvModel& env, const ParamVector& theta, std::span<const double> s0) {
  require(s0.size() == env.state_dim(), "initial state has wrong dimension");
  require(theta.spec().state_dim == env.state_dim() && theta.spec().action_dim == env.action_dim(),
          "policy dimensions do not match environment");
}

// Accumulation shared by both variants. `advance` steps every tracked pair,
// `separation` writes the (mean) separation vector, `rescale` pulls the twins
// back by the given factor, `reseed` re-places twins at d0 along a direction.
template <class Advance, class Separation, class Rescale, class Reseed>
RestartResult benettin(const MleConfig& cfg, std::size_t dim, std::span<const double> dir0, Advance advance,
                       Separation separation, Rescale rescale, Reseed reseed) {
  RestartResult out;
  std::vector<double> dir(dir0.begin(), dir0.end());
  Buf diff{};
  const std::span<double> diff_s(diff.data(), dim);

  reseed(dir);
  separation(diff_s);
  double d_prev = norm(diff_s);
  const std::size_t steps = cfg.t_max - cfg.transient_skip;
  std::size_t window_len = 0;
  for (std::size_t t = 0; t < steps; ++t) {
    advance();
    ++window_len;
    separation(diff_s);
    const double d = norm(diff_s);
    const bool close = d >= cfg.renorm_threshold || d <= cfg.d0 * cfg.collapse_ratio || window_len >= cfg.window ||
                       t + 1 == steps;
    if (!close) continue;
    if (!(d > 0.0) || !std::isfinite(d) || !(d_prev > 0.0)) {
      out.censored = true;
      reseed(dir);
    } else {
      const double stretch = std::log(d / d_prev);
      out.total += stretch;
      out.steps += window_len;
      out.window_logs.push_back(stretch);
      ++out.renorms;
      for (std::size_t i = 0; i < dim; ++i) dir[i] = diff[i] / d;
      rescale(cfg.d0 / d);
    }
    separation(diff_s);
    d_prev = norm(diff_s);
    window_len = 0;
  }
  return out;
}

MleEstimate combine(std::vector<RestartResult>& results) {
  MleEstimate est;
  est.lambda = -std::numeric_limits<double>::infinity();
  std::size_t best = 0;
  for (std::size_t r = 0; r < results.size(); ++r) {
    const double l = results[r].lambda();
    est.restart_lambdas.push_back(l);
    est.censored = est.censored || results[r].censored;
    if (r == 0 || l > est.lambda) {
      est.lambda = l;
      best = r;
    }
  }
  est.window_logs = std::move(results[best].window_logs);
  est.n_renorms = results[best].renorms;
  est.steps_counted = results[best].steps;
  return est;
}

}  // namespace

void MleConfig::validate() const {
  require(d0 > 0.0 && d0 < renorm_threshold, "need 0 < d0 < renorm_threshold");
  require(t_max > transient_skip, "t_max must exceed transient_skip");
  require(window >= 1, "renormalization window must be at least 1 step");
  require(restarts >= 1, "need at least one restart");
  require(n_paths >= 1, "need at least one sample path");
  require(collapse_ratio > 0.0 && collapse_ratio < 1.0, "collapse_ratio must lie in (0, 1)");
}

MleEstimate estimate_mle(const EnvModel& env, const ParamVector& theta, std::span<const double> s0,
                         const MleConfig& cfg) {
  cfg.validate();
  check_inputs(env, theta, s0);
  const std::size_t dim = env.state_dim();

  Buf start{};
  env.project(s0, std::span<double>(start.data(), dim));
  for (std::size_t t = 0; t < cfg.transient_skip; ++t) closed_loop_step(env, theta, std::span<double>(start.data(), dim));

  std::vector<RestartResult> results(cfg.restarts);
  for_each_index(cfg.restarts, cfg.exec, [&](std::size_t r) {
    const auto dir = initial_direction(cfg, dim, r);
    Buf s = start, twin{};
    const std::span<double> ss(s.data(), dim), ts(twin.data(), dim);
    results[r] = benettin(
        cfg, dim, dir,
        [&] {
          closed_loop_step(env, theta, ss);
          closed_loop_step(env, theta, ts);
        },
        [&](std::span<double> out) { env.difference(ts, ss, out); },
        [&](double factor) {
          Buf diff{};
          env.difference(ts, ss, std::span<double>(diff.data(), dim));
          place_twin(env, ss, std::span<const double>(diff.data(), dim), factor, ts);
        },
        [&](std::span<const double> d) { place_twin(env, ss, d, cfg.d0, ts); });
  });
  return combine(results);
}

MleEstimate estimate_mle_stochastic(const EnvModel& env, const ParamVector& theta, std::span<const double> s0,
                                    const MleConfig& cfg) {
  cfg.validate();
  check_inputs(env, theta, s0);
  const std::size_t dim = env.state_dim();
  const std::size_t k = noise_dim(theta.spec());
  const std::size_t paths = cfg.n_paths;

  std::vector<RestartResult> results(cfg.restarts);
  for_each_index(cfg.restarts, cfg.exec, [&](std::size_t r) {
    const auto dir = initial_direction(cfg, dim, r);
    std::vector<RngStream> streams;
    streams.reserve(paths);
    for (std::size_t p = 0; p < paths; ++p) {
      streams.emplace_back(cfg.seed, StreamTag::mle, derive_seed(r + 1, p));
    }
    std::vector<Buf> ref(paths), twin(paths);
    std::vector<double> noise(std::max<std::size_t>(k, 1));
    for (std::size_t p = 0; p < paths; ++p) {
      env.project(s0, std::span<double>(ref[p].data(), dim));
      for (std::size_t t = 0; t < cfg.transient_skip; ++t) {
        draw_noise(theta.spec(), streams[p], std::span<double>(noise.data(), k));
        noisy_step(env, theta, std::span<const double>(noise.data(), k), std::span<double>(ref[p].data(), dim));
      }
    }
    results[r] = benettin(
        cfg, dim, dir,
        [&] {
          for (std::size_t p = 0; p < paths; ++p) {
            draw_noise(theta.spec(), streams[p], std::span<double>(noise.data(), k));
            const std::span<const double> z(noise.data(), k);
            noisy_step(env, theta, z, std::span<double>(ref[p].data(), dim));
            noisy_step(env, theta, z, std::span<double>(twin[p].data(), dim));
          }
        },
        [&](std::span<double> out) {
          std::fill(out.begin(), out.end(), 0.0);
          Buf diff{};
          for (std::size_t p = 0; p < paths; ++p) {
            env.difference(std::span<const double>(twin[p].data(), dim), std::span<const double>(ref[p].data(), dim),
                           std::span<double>(diff.data(), dim));
            for (std::size_t i = 0; i < dim; ++i) out[i] += diff[i];
          }
          for (auto& x : out) x /= static_cast<double>(paths);
        },
        [&](double factor) {
          Buf diff{};
          for (std::size_t p = 0; p < paths; ++p) {
            const std::span<const double> rs(ref[p].data(), dim);
            env.difference(std::span<const double>(twin[p].data(), dim), rs, std::span<double>(diff.data(), dim));
            place_twin(env, rs, std::span<const double>(diff.data(), dim), factor,
                       std::span<double>(twin[p].data(), dim));
          }
        },
        [&](std::span<const double> d) {
          for (std::size_t p = 0; p < paths; ++p) {
            place_twin(env, std::span<const double>(ref[p].data(), dim), d, cfg.d0,
                       std::span<double>(twin[p].data(), dim));
          }
        });
  });
  return combine(results);
}

std::vector<MleSweepPoint> mle_sweep(const EnvModel& env, const PolicySpec& spec, std::span<const double> grid,
                                     std::span<const double> s0, const MleConfig& cfg) {
  require(spec.param_count() == 1, "mle_sweep needs a one-parameter policy family");
  std::vector<MleSweepPoint> points(grid.size());
  MleConfig inner = cfg;
  inner.exec = Exec::serial;
  for_each_index(grid.size(), cfg.exec, [&](std::size_t i) {
    points[i].theta = grid[i];
    try {
      points[i].estimate = estimate_mle(env, ParamVector(spec, {grid[i]}), s0, inner);
    } catch (const Error& e) {
      points[i].error = e.what();
    }
  });
  return points;
}

}  // namespace fractalscape
