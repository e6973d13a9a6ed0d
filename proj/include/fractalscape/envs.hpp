#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fractalscape {

using State = std::vector<double>;
using Action = std::vector<double>;

enum class EnvKind { logistic, sat1d, sat1d_shifted, pendulum, acrobot };

inline constexpr std::size_t kMaxStateDim = 4;
inline constexpr std::size_t kMaxActionDim = 1;

/// Deterministic closed control system s' = f(s, a) on a compact box S,
/// with a non-negative cost. Immutable after construction; all members are
/// safe to call concurrently.
///
/// Pendulum: [angle from upright, angular velocity], semi-implicit Euler.
/// Acrobot: [theta1, theta2, dtheta1, dtheta2] with theta1 = 0 upright,
/// torque on the second joint, one RK4 step per transition.
class EnvModel {
 public:
  static EnvModel make(EnvKind kind);
  /// Accepts logistic | sat1d | sat1d-shifted | pendulum | acrobot.
  static EnvModel from_name(std::string_view name);

  EnvKind kind() const noexcept { return kind_; }
  std::string_view name() const noexcept;
  std::size_t state_dim() const noexcept { return state_lo_.size(); }
  std::size_t action_dim() const noexcept { return action_lo_.size(); }

  const std::vector<double>& state_lo() const noexcept { return state_lo_; }
  const std::vector<double>& state_hi() const noexcept { return state_hi_; }
  const std::vector<double>& action_lo() const noexcept { return action_lo_; }
  const std::vector<double>& action_hi() const noexcept { return action_hi_; }

  /// Whether coordinate i is an angle wrapped to [-pi, pi).
  bool is_angle(std::size_t i) const noexcept;

  State default_initial_state() const;

  /// Upper bound of c(s, a) over S x A.
  double cost_bound() const noexcept { return cost_bound_; }

  /// Lipschitz constant of step(., a) over S used by the spot checks.
  double lipschitz_bound() const noexcept { return lipschitz_bound_; }

  /// Clamps `a` to A, advances one transition and projects into S.
  /// Throws Error(non_finite_state) if the result is not finite.
  void step(std::span<const double> s, std::span<const double> a, std::span<double> out) const;
  State step(std::span<const double> s, std::span<const double> a) const;

  /// Exact per-environment cost formula; `a` is used as given.
  double cost(std::span<const double> s, std::span<const double> a) const;

  void project(std::span<const double> raw, std::span<double> out) const;
  State project(std::span<const double> raw) const;

  void clamp_action(std::span<const double> a, std::span<double> out) const;

  /// a - b with angle coordinates reduced to [-pi, pi).
  void difference(std::span<const double> a, std::span<const double> b, std::span<double> out) const;

 private:
  EnvModel() = default;

  void raw_step(std::span<const double> s, double action, std::span<double> out) const;

  EnvKind kind_ = EnvKind::logistic;
  std::vector<double> state_lo_, state_hi_, action_lo_, action_hi_;
  std::vector<bool> angle_;
  double cost_bound_ = 0.0;
  double lipschitz_bound_ = 0.0;
};

double wrap_angle(double x) noexcept;

namespace pendulum_params {
inline constexpr double gravity = 10.0;
inline constexpr double mass = 1.0;
inline constexpr double length = 1.0;
inline constexpr double dt = 0.05;
inline constexpr double max_torque = 2.0;
inline constexpr double max_speed = 8.0;
}  // namespace pendulum_params

namespace acrobot_params {
inline constexpr double link_mass = 1.0;
inline constexpr double link_length = 1.0;
inline constexpr double link_com = 0.5;
inline constexpr double link_moi = 1.0;
inline constexpr double gravity = 9.8;
inline constexpr double dt = 0.2;
inline constexpr double max_torque = 1.0;
}  // namespace acrobot_params

}  // namespace fractalscape
