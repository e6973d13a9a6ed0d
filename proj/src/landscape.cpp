#include "fractalscape/landscape.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "fractalscape/error.hpp"

namespace fractalscape {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double evaluate_point(const EnvModel& env, const ParamVector& theta, const RolloutConfig& cfg) {
  return cfg.mode == EvalMode::stochastic ? discounted_cost_path(env, theta, cfg, 0) : objective(env, theta, cfg);
}

}  // namespace

ScanResult scan(const EnvModel& env, const ParamVector& theta0, std::span<const double> direction,
                std::size_t n_steps, double step_size, const RolloutConfig& cfg) {
  cfg.validate();
  require(direction.size() == theta0.size(), "scan direction has wrong dimension");
  require(n_steps >= 1, "scan needs at least one step");
  bool nonzero = false;
  for (double d : direction) nonzero = nonzero || d != 0.0;
  require(nonzero, "scan direction must be non-zero");

  ScanResult r;
  r.theta0.assign(theta0.values().begin(), theta0.values().end());
  r.direction.assign(direction.begin(), direction.end());
  r.gamma = cfg.gamma;
  r.stochastic_path = cfg.mode == EvalMode::stochastic;
  r.tail_bound = tail_bound(env, cfg.gamma, cfg.horizon);
  r.deltas.resize(n_steps);
  r.j_values.assign(n_steps, std::numeric_limits<double>::quiet_NaN());
  std::vector<char> failed(n_steps, 0);

  RolloutConfig inner = cfg;
  inner.exec = Exec::serial;
  for_each_index(n_steps, cfg.exec, [&](std::size_t i) {
    const double delta = static_cast<double>(i) * step_size;
    r.deltas[i] = delta;
    std::vector<double> v(r.theta0);
    for (std::size_t j = 0; j < v.size(); ++j) v[j] += delta * direction[j];
    try {
      r.j_values[i] = evaluate_point(env, theta0.with_values(std::move(v)), inner);
    } catch (const Error&) {
      failed[i] = 1;
    }
  });
  for (std::size_t i = 0; i < n_steps; ++i) {
    if (failed[i]) r.gaps.push_back(i);
  }
  return r;
}

SweepResult sweep(const EnvModel& env, const PolicySpec& spec, double lo, double hi, std::size_t n_points,
                  const RolloutConfig& cfg) {
  cfg.validate();
  require(spec.param_count() == 1, "sweep needs a one-parameter policy family");
  require(n_points >= 2, "sweep needs at least two points");
  require(hi > lo, "sweep needs lo < hi");

  SweepResult r;
  r.gamma = cfg.gamma;
  r.tail_bound = tail_bound(env, cfg.gamma, cfg.horizon);
  r.theta_grid.resize(n_points);
  r.j_values.assign(n_points, std::numeric_limits<double>::quiet_NaN());
  std::vector<char> failed(n_points, 0);
  RolloutConfig det = cfg;
  det.mode = EvalMode::deterministic;
  det.exec = Exec::serial;
  for_each_index(n_points, cfg.exec, [&](std::size_t i) {
    const double theta = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_points - 1);
    r.theta_grid[i] = theta;
    try {
      r.j_values[i] = objective(env, ParamVector(spec, {theta}), det);
    } catch (const Error&) {
      failed[i] = 1;
    }
  });
  for (std::size_t i = 0; i < n_points; ++i) {
    if (failed[i]) r.gaps.push_back(i);
  }
  return r;
}

Roughness roughness(std::span<const double> xs, std::span<const double> ys) {
  require(xs.size() == ys.size(), "roughness needs matching x and y lengths");
  if (ys.size() < 3) throw Error(ErrorKind::insufficient_points, "roughness needs at least 3 points");
  Roughness r;
  for (std::size_t i = 0; i + 1 < ys.size(); ++i) r.total_variation += std::abs(ys[i + 1] - ys[i]);
  for (std::size_t i = 1; i + 1 < ys.size(); ++i) {
    const double left = (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]);
    const double right = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
    const double dd = 2.0 * (right - left) / (xs[i + 1] - xs[i - 1]);
    r.max_second_divided_difference = std::max(r.max_second_divided_difference, std::abs(dd));
  }
  return r;
}

void write_scan_csv(std::ostream& out, const ScanResult& r) {
  out << "delta,J,tail_bound\n";
  for (std::size_t i = 0; i < r.deltas.size(); ++i) {
    out << fmt17(r.deltas[i]) << ',' << fmt17(r.j_values[i]) << ',' << fmt17(r.tail_bound) << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const SweepResult& r) {
  out << "theta,J,tail_bound\n";
  for (std::size_t i = 0; i < r.theta_grid.size(); ++i) {
    out << fmt17(r.theta_grid[i]) << ',' << fmt17(r.j_values[i]) << ',' << fmt17(r.tail_bound) << '\n';
  }
}

}  // namespace fractalscape
