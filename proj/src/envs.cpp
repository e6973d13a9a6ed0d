#include "fractalscape/envs.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "fractalscape/error.hpp"

namespace fractalscape {

namespace {

constexpr double kPi = std::numbers::pi;

// Acrobot accelerations for state y = [t1, t2, dt1, dt2] and joint-2 torque.
std::array<double, 4> acrobot_derivative(const std::array<double, 4>& y, double torque) {
  using namespace acrobot_params;
  const double m1 = link_mass, m2 = link_mass;
  const double l1 = link_length;
  const double lc1 = link_com, lc2 = link_com;
  const double i1 = link_moi, i2 = link_moi;
  const double g = gravity;
  const double t1 = y[0], t2 = y[1], dt1 = y[2], dt2 = y[3];

  const double d1 = m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * std::cos(t2)) + i1 + i2;
  const double d2 = m2 * (lc2 * lc2 + l1 * lc2 * std::cos(t2)) + i2;
  const double phi2 = m2 * lc2 * g * std::cos(t1 + t2 - kPi / 2.0);
  const double phi1 = -m2 * l1 * lc2 * dt2 * dt2 * std::sin(t2) -
                      2.0 * m2 * l1 * lc2 * dt2 * dt1 * std::sin(t2) +
                      (m1 * lc1 + m2 * l1) * g * std::cos(t1 - kPi / 2.0) + phi2;
  const double ddt2 = (torque + d2 / d1 * phi1 - m2 * l1 * lc2 * dt1 * dt1 * std::sin(t2) - phi2) /
                      (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
  const double ddt1 = -(d2 * ddt2 + phi1) / d1;
  return {dt1, dt2, ddt1, ddt2};
}

}  // namespace

double wrap_angle(double x) noexcept {
  double r = std::fmod(x + kPi, 2.0 * kPi);
  if (r < 0.0) r += 2.0 * kPi;
  r -= kPi;
  // fmod rounding can land exactly on +pi
  return r >= kPi ? -kPi : r;
}

EnvModel EnvModel::make(EnvKind kind) {
  EnvModel env;
  env.kind_ = kind;
  switch (kind) {
    case EnvKind::logistic:
      env.state_lo_ = {-3.0};
      env.state_hi_ = {3.0};
      env.action_lo_ = {-10.0};
      env.action_hi_ = {10.0};
      env.angle_ = {false};
      env.cost_bound_ = 9.0 + 0.1 * 100.0;
      // |d/ds (1 - s) a| = |a| <= 10
      env.lipschitz_bound_ = 10.0;
      break;
    case EnvKind::sat1d:
      env.state_lo_ = {-1.0};
      env.state_hi_ = {1.0};
      env.action_lo_ = {-4.0};
      env.action_hi_ = {4.0};
      env.angle_ = {false};
      env.cost_bound_ = 1.0;
      env.lipschitz_bound_ = 0.0;  // f does not depend on s
      break;
    case EnvKind::sat1d_shifted:
      env.state_lo_ = {0.0};
      env.state_hi_ = {1.0};
      env.action_lo_ = {0.0};
      env.action_hi_ = {10.0};
      env.angle_ = {false};
      env.cost_bound_ = 2.0;
      env.lipschitz_bound_ = 0.0;
      break;
    case EnvKind::pendulum: {
      using namespace pendulum_params;
      env.state_lo_ = {-kPi, -max_speed};
      env.state_hi_ = {kPi, max_speed};
      env.action_lo_ = {-max_torque};
      env.action_hi_ = {max_torque};
      env.angle_ = {true, false};
      env.cost_bound_ = kPi * kPi + 0.1 * max_speed * max_speed + 0.001 * max_torque * max_torque;
      // Frobenius norm bound of the Jacobian of (phi, w) -> (phi + dt w', w'),
      // w' = w + dt g/l sin(phi)
      const double k = dt * gravity / length;
      env.lipschitz_bound_ = std::sqrt((1.0 + dt * k) * (1.0 + dt * k) + dt * dt + k * k + 1.0);
      break;
    }
    case EnvKind::acrobot: {
      using namespace acrobot_params;
      const double v1 = 4.0 * kPi, v2 = 9.0 * kPi;
      env.state_lo_ = {-kPi, -kPi, -v1, -v2};
      env.state_hi_ = {kPi, kPi, v1, v2};
      env.action_lo_ = {-max_torque};
      env.action_hi_ = {max_torque};
      env.angle_ = {true, true, false, false};
      env.cost_bound_ = 2.0 * kPi * kPi + 0.1 * (v1 * v1 + v2 * v2) + 0.005 * max_torque * max_torque;
      // Numerical sup of ||D step||_2 over S x A is about 4.2e4, reached near
      // the velocity limits where one RK4 step at dt = 0.2 is far from the flow.
      env.lipschitz_bound_ = 1e5;
      break;
    }
  }
  return env;
}

EnvModel EnvModel::from_name(std::string_view name) {
  if (name == "logistic") return make(EnvKind::logistic);
  if (name == "sat1d") return make(EnvKind::sat1d);
  if (name == "sat1d-shifted") return make(EnvKind::sat1d_shifted);
  if (name == "pendulum") return make(EnvKind::pendulum);
  if (name == "acrobot") return make(EnvKind::acrobot);
  throw Error(ErrorKind::invalid_argument, "unknown environment '" + std::string(name) + "'");
}

std::string_view EnvModel::name() const noexcept {
  switch (kind_) {
    case EnvKind::logistic: return "logistic";
    case EnvKind::sat1d: return "sat1d";
    case EnvKind::sat1d_shifted: return "sat1d-shifted";
    case EnvKind::pendulum: return "pendulum";
    case EnvKind::acrobot: return "acrobot";
  }
  return "unknown";
}

bool EnvModel::is_angle(std::size_t i) const noexcept { return i < angle_.size() && angle_[i]; }

State EnvModel::default_initial_state() const {
  switch (kind_) {
    case EnvKind::logistic: return {0.9};
    case EnvKind::sat1d: return {0.0};
    case EnvKind::sat1d_shifted: return {0.0};
    case EnvKind::pendulum: return {-1.0, 0.0};
    case EnvKind::acrobot: return {1.0, 0.0, 0.0, 0.0};
  }
  return {};
}

void EnvModel::clamp_action(std::span<const double> a, std::span<double> out) const {
  require(a.size() == action_dim() && out.size() == action_dim(), "action dimension mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = std::clamp(a[i], action_lo_[i], action_hi_[i]);
  }
}

void EnvModel::project(std::span<const double> raw, std::span<double> out) const {
  require(raw.size() == state_dim() && out.size() == state_dim(), "state dimension mismatch");
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out[i] = angle_[i] ? wrap_angle(raw[i]) : std::clamp(raw[i], state_lo_[i], state_hi_[i]);
  }
}

State EnvModel::project(std::span<const double> raw) const {
  State out(state_dim());
  project(raw, out);
  return out;
}

void EnvModel::raw_step(std::span<const double> s, double a, std::span<double> out) const {
  switch (kind_) {
    case EnvKind::logistic:
      out[0] = (1.0 - s[0]) * a;
      break;
    case EnvKind::sat1d:
      out[0] = std::clamp(a, -1.0, 1.0);
      break;
    case EnvKind::sat1d_shifted:
      out[0] = std::clamp(a, 0.0, 1.0);
      break;
    case EnvKind::pendulum: {
      using namespace pendulum_params;
      const double accel = gravity / length * std::sin(s[0]) + a / (mass * length * length);
      const double w = std::clamp(s[1] + dt * accel, -max_speed, max_speed);
      out[0] = s[0] + dt * w;
      out[1] = w;
      break;
    }
    case EnvKind::acrobot: {
      const double h = acrobot_params::dt;
      // theta1 is stored relative to upright; the equations use hanging-down = 0
      const std::array<double, 4> y0{s[0] + kPi, s[1], s[2], s[3]};
      auto axpy = [](const std::array<double, 4>& y, double c, const std::array<double, 4>& k) {
        return std::array<double, 4>{y[0] + c * k[0], y[1] + c * k[1], y[2] + c * k[2], y[3] + c * k[3]};
      };
      const auto k1 = acrobot_derivative(y0, a);
      const auto k2 = acrobot_derivative(axpy(y0, h / 2.0, k1), a);
      const auto k3 = acrobot_derivative(axpy(y0, h / 2.0, k2), a);
      const auto k4 = acrobot_derivative(axpy(y0, h, k3), a);
      for (int i = 0; i < 4; ++i) {
        out[i] = y0[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      }
      out[0] -= kPi;
      break;
    }
  }
}

void EnvModel::step(std::span<const double> s, std::span<const double> a, std::span<double> out) const {
  require(s.size() == state_dim() && out.size() == state_dim(), "state dimension mismatch");
  require(a.size() == action_dim(), "action dimension mismatch");
  const double applied = std::clamp(a[0], action_lo_[0], action_hi_[0]);
  std::array<double, kMaxStateDim> raw{};
  const std::span<double> raw_span(raw.data(), state_dim());
  raw_step(s, applied, raw_span);
  project(raw_span, out);
  for (double v : out) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::non_finite_state,
                  "non-finite state after " + std::string(name()) + " step");
    }
  }
}

State EnvModel::step(std::span<const double> s, std::span<const double> a) const {
  State out(state_dim());
  step(s, a, out);
  return out;
}

double EnvModel::cost(std::span<const double> s, std::span<const double> a) const {
  switch (kind_) {
    case EnvKind::logistic:
      return s[0] * s[0] + 0.1 * a[0] * a[0];
    case EnvKind::sat1d:
      return std::abs(s[0]);
    case EnvKind::sat1d_shifted:
      return s[0] + 1.0;
    case EnvKind::pendulum:
      return s[0] * s[0] + 0.1 * s[1] * s[1] + 0.001 * a[0] * a[0];
    case EnvKind::acrobot:
      return s[0] * s[0] + s[1] * s[1] + 0.1 * (s[2] * s[2] + s[3] * s[3]) + 0.005 * a[0] * a[0];
  }
  return 0.0;
}

void EnvModel::difference(std::span<const double> a, std::span<const double> b, std::span<double> out) const {
  for (std::size_t i = 0; i < state_dim(); ++i) {
    const double d = a[i] - b[i];
    out[i] = angle_[i] ? wrap_angle(d) : d;
  }
}

}  // namespace fractalscape
