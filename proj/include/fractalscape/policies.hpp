#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fractalscape/envs.hpp"
#include "fractalscape/rng.hpp"

namespace fractalscape {

enum class PolicyKind { linear_det, tanh_net_det, tanh_net_gaussian, uniform_affine };

/// Policy family and its dimensions.
///
/// linear_det:        a = K s, K is m x n.
/// tanh_net_*:        u(s) = W2 tanh(W1 s), W1 is r x n, W2 is m x r, no biases.
///                    The Gaussian variant appends a log-sigma slot.
/// uniform_affine:  a ~ U(|t1| s + |t2|^beta, |t1| s + 2 |t2|^beta), n = m = 1.
struct PolicySpec {
  PolicyKind kind = PolicyKind::linear_det;
  std::size_t state_dim = 1;
  std::size_t action_dim = 1;
  std::size_t hidden = 8;
  double beta = 1.0;

  static PolicySpec linear(std::size_t n = 1, std::size_t m = 1);
  static PolicySpec tanh_net(std::size_t n, std::size_t m, std::size_t r, bool gaussian);
  static PolicySpec uniform(double beta = 1.0);

  std::size_t param_count() const;
  bool stochastic() const noexcept {
    return kind == PolicyKind::tanh_net_gaussian || kind == PolicyKind::uniform_affine;
  }
  bool has_log_sigma() const noexcept { return kind == PolicyKind::tanh_net_gaussian; }
  bool is_net() const noexcept {
    return kind == PolicyKind::tanh_net_det || kind == PolicyKind::tanh_net_gaussian;
  }
  void validate() const;

  std::string kind_name() const;
  static PolicyKind kind_from_name(const std::string& name);

  friend bool operator==(const PolicySpec&, const PolicySpec&) = default;
};

/// Flat parameter vector tied to its layout. The log-sigma slot, when present,
/// is the last entry and may be -inf (sigma = 0, the deterministic limit).
class ParamVector {
 public:
  ParamVector(PolicySpec spec, std::vector<double> values);
  /// All zeros (log-sigma slot set to log(sigma0) when present).
  static ParamVector zeros(const PolicySpec& spec, double sigma0 = 0.1);
  /// Weights ~ N(0, scale^2), log-sigma slot = log(sigma0).
  static ParamVector random_normal(const PolicySpec& spec, RngStream& rng, double scale = 0.05,
                                   double sigma0 = 0.1);

  const PolicySpec& spec() const noexcept { return spec_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  /// Row-major views. For linear_det w1() is K and w2() is empty.
  std::span<const double> w1() const;
  std::span<const double> w2() const;
  double log_sigma() const;
  double sigma() const;
  void set_log_sigma(double v);
  /// Index of the log-sigma slot, if any.
  std::optional<std::size_t> log_sigma_index() const;

  ParamVector with_values(std::vector<double> values) const { return ParamVector(spec_, std::move(values)); }

 private:
  PolicySpec spec_;
  std::vector<double> values_;
};

/// Weight blocks unpacked from a flat vector; flatten() restores it exactly.
struct UnpackedParams {
  std::vector<double> w1;
  std::vector<double> w2;
  std::optional<double> log_sigma;
};
UnpackedParams unflatten(const ParamVector& theta);
ParamVector flatten(const PolicySpec& spec, const UnpackedParams& parts);

struct ActionSample {
  Action action;
  /// Empty when the density is degenerate (sigma = 0).
  std::optional<double> log_prob;
  std::vector<double> score;
  bool degenerate = false;
};

/// Deterministic action: K s for linear, W2 tanh(W1 s) for nets, the interval
/// midpoint for the uniform family.
void mean_action(const ParamVector& theta, std::span<const double> s, std::span<double> out);
Action mean_action(const ParamVector& theta, std::span<const double> s);

/// Number of noise variates one action draw consumes.
std::size_t noise_dim(const PolicySpec& spec);
/// Draws the noise variates for one action (standard normals for Gaussian,
/// uniforms on (0,1) for the uniform family).
void draw_noise(const PolicySpec& spec, RngStream& rng, std::span<double> out);
/// Action for pre-drawn noise: u(s) + sigma z (Gaussian), lo + u (hi - lo)
/// (uniform). Deterministic kinds ignore the noise.
void action_from_noise(const ParamVector& theta, std::span<const double> s, std::span<const double> noise,
                       std::span<double> out);

/// Samples an action. With with_score the log-density and score are filled in
/// unless the density is degenerate, in which case `degenerate` is set.
ActionSample sample_action(const ParamVector& theta, std::span<const double> s, RngStream& rng,
                           bool with_score = true);
ActionSample sample_action_from_noise(const ParamVector& theta, std::span<const double> s,
                                      std::span<const double> noise, bool with_score = true);

/// log N(a; u(s), sigma^2 I). Throws degenerate_density when sigma = 0.
double log_density(const ParamVector& theta, std::span<const double> s, std::span<const double> a);

/// Analytic grad_theta log pi(a | s) for the Gaussian family, including the
/// log-sigma coordinate. Throws degenerate_density when sigma = 0.
void score_gradient(const ParamVector& theta, std::span<const double> s, std::span<const double> a,
                    std::span<double> out);
std::vector<double> score_gradient(const ParamVector& theta, std::span<const double> s,
                                   std::span<const double> a);

}  // namespace fractalscape
