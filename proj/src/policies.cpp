#include "fractalscape/policies.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "fractalscape/error.hpp"

namespace fractalscape {

namespace {

constexpr std::size_t kMaxHidden = 1024;

void check_dims(const ParamVector& theta, std::span<const double> s) {
  require(s.size() == theta.spec().state_dim, "policy input has wrong dimension");
}

// hidden = tanh(W1 s); out = W2 hidden
void net_forward(const ParamVector& theta, std::span<const double> s, std::span<double> hidden,
                 std::span<double> out) {
  const auto& spec = theta.spec();
  const auto w1 = theta.w1();
  const auto w2 = theta.w2();
  for (std::size_t i = 0; i < spec.hidden; ++i) {
    double z = 0.0;
    for (std::size_t j = 0; j < spec.state_dim; ++j) z += w1[i * spec.state_dim + j] * s[j];
    hidden[i] = std::tanh(z);
  }
  for (std::size_t k = 0; k < spec.action_dim; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < spec.hidden; ++i) acc += w2[k * spec.hidden + i] * hidden[i];
    out[k] = acc;
  }
}

std::pair<double, double> uniform_interval(const ParamVector& theta, double s) {
  const double width = std::pow(std::abs(theta[1]), theta.spec().beta);
  const double base = std::abs(theta[0]) * s;
  return {base + width, base + 2.0 * width};
}

}  // namespace

PolicySpec PolicySpec::linear(std::size_t n, std::size_t m) {
  PolicySpec spec;
  spec.kind = PolicyKind::linear_det;
  spec.state_dim = n;
  spec.action_dim = m;
  spec.hidden = 0;
  return spec;
}

PolicySpec PolicySpec::tanh_net(std::size_t n, std::size_t m, std::size_t r, bool gaussian) {
  PolicySpec spec;
  spec.kind = gaussian ? PolicyKind::tanh_net_gaussian : PolicyKind::tanh_net_det;
  spec.state_dim = n;
  spec.action_dim = m;
  spec.hidden = r;
  return spec;
}

PolicySpec PolicySpec::uniform(double beta) {
  PolicySpec spec;
  spec.kind = PolicyKind::uniform_affine;
  spec.state_dim = 1;
  spec.action_dim = 1;
  spec.hidden = 0;
  spec.beta = beta;
  return spec;
}

std::size_t PolicySpec::param_count() const {
  switch (kind) {
    case PolicyKind::linear_det: return action_dim * state_dim;
    case PolicyKind::tanh_net_det: return hidden * state_dim + action_dim * hidden;
    case PolicyKind::tanh_net_gaussian: return hidden * state_dim + action_dim * hidden + 1;
    case PolicyKind::uniform_affine: return 2;
  }
  return 0;
}

void PolicySpec::validate() const {
  require(state_dim >= 1 && state_dim <= kMaxStateDim, "policy state dimension out of range");
  require(action_dim >= 1 && action_dim <= kMaxActionDim, "policy action dimension out of range");
  if (is_net()) require(hidden >= 1 && hidden <= kMaxHidden, "hidden width must be in [1, 1024]");
  if (kind == PolicyKind::uniform_affine) {
    require(beta > 0.0, "uniform policy exponent beta must be positive");
    require(state_dim == 1 && action_dim == 1, "uniform policy is one-dimensional");
  }
}

std::string PolicySpec::kind_name() const {
  switch (kind) {
    case PolicyKind::linear_det: return "linear";
    case PolicyKind::tanh_net_det: return "tanh-net-det";
    case PolicyKind::tanh_net_gaussian: return "tanh-net";
    case PolicyKind::uniform_affine: return "uniform";
  }
  return "unknown";
}

PolicyKind PolicySpec::kind_from_name(const std::string& name) {
  if (name == "linear") return PolicyKind::linear_det;
  if (name == "tanh-net-det") return PolicyKind::tanh_net_det;
  if (name == "tanh-net") return PolicyKind::tanh_net_gaussian;
  if (name == "uniform") return PolicyKind::uniform_affine;
  throw Error(ErrorKind::invalid_argument, "unknown policy '" + name + "'");
}

ParamVector::ParamVector(PolicySpec spec, std::vector<double> values)
    : spec_(spec), values_(std::move(values)) {
  spec_.validate();
  if (values_.size() != spec_.param_count()) {
    throw Error(ErrorKind::layout_mismatch, "parameter vector has " + std::to_string(values_.size()) +
                                                " entries, layout expects " +
                                                std::to_string(spec_.param_count()));
  }
  const auto sigma_slot = log_sigma_index();
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const bool ok = std::isfinite(values_[i]) ||
                    (sigma_slot && i == *sigma_slot && values_[i] == -INFINITY);
    if (!ok) throw Error(ErrorKind::invalid_argument, "parameter vector has a non-finite entry");
  }
}

ParamVector ParamVector::zeros(const PolicySpec& spec, double sigma0) {
  std::vector<double> v(spec.param_count(), 0.0);
  if (spec.has_log_sigma()) v.back() = std::log(sigma0);
  return ParamVector(spec, std::move(v));
}

ParamVector ParamVector::random_normal(const PolicySpec& spec, RngStream& rng, double scale, double sigma0) {
  std::vector<double> v(spec.param_count());
  for (auto& x : v) x = scale * rng.normal();
  if (spec.has_log_sigma()) v.back() = std::log(sigma0);
  return ParamVector(spec, std::move(v));
}

std::span<const double> ParamVector::w1() const {
  const std::size_t len = spec_.kind == PolicyKind::linear_det ? spec_.action_dim * spec_.state_dim
                          : spec_.is_net()                      ? spec_.hidden * spec_.state_dim
                                                                : 0;
  return std::span<const double>(values_).subspan(0, len);
}

std::span<const double> ParamVector::w2() const {
  if (!spec_.is_net()) return {};
  return std::span<const double>(values_).subspan(spec_.hidden * spec_.state_dim,
                                                  spec_.action_dim * spec_.hidden);
}

std::optional<std::size_t> ParamVector::log_sigma_index() const {
  if (!spec_.has_log_sigma()) return std::nullopt;
  return values_.size() - 1;
}

double ParamVector::log_sigma() const {
  require(spec_.has_log_sigma(), "policy has no sigma parameter");
  return values_.back();
}

double ParamVector::sigma() const { return spec_.has_log_sigma() ? std::exp(values_.back()) : 0.0; }

void ParamVector::set_log_sigma(double v) {
  require(spec_.has_log_sigma(), "policy has no sigma parameter");
  values_.back() = v;
}

UnpackedParams unflatten(const ParamVector& theta) {
  UnpackedParams parts;
  const auto spec = theta.spec();
  if (spec.kind == PolicyKind::uniform_affine) {
    parts.w1.assign(theta.values().begin(), theta.values().end());
    return parts;
  }
  parts.w1.assign(theta.w1().begin(), theta.w1().end());
  parts.w2.assign(theta.w2().begin(), theta.w2().end());
  if (spec.has_log_sigma()) parts.log_sigma = theta.log_sigma();
  return parts;
}

ParamVector flatten(const PolicySpec& spec, const UnpackedParams& parts) {
  std::vector<double> v(parts.w1);
  v.insert(v.end(), parts.w2.begin(), parts.w2.end());
  if (parts.log_sigma) v.push_back(*parts.log_sigma);
  return ParamVector(spec, std::move(v));
}

void mean_action(const ParamVector& theta, std::span<const double> s, std::span<double> out) {
  check_dims(theta, s);
  const auto& spec = theta.spec();
  require(out.size() == spec.action_dim, "action buffer has wrong dimension");
  switch (spec.kind) {
    case PolicyKind::linear_det: {
      const auto k = theta.w1();
      for (std::size_t i = 0; i < spec.action_dim; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < spec.state_dim; ++j) acc += k[i * spec.state_dim + j] * s[j];
        out[i] = acc;
      }
      break;
    }
    case PolicyKind::tanh_net_det:
    case PolicyKind::tanh_net_gaussian: {
      std::array<double, kMaxHidden> hidden;
      net_forward(theta, s, std::span<double>(hidden.data(), spec.hidden), out);
      break;
    }
    case PolicyKind::uniform_affine: {
      const auto [lo, hi] = uniform_interval(theta, s[0]);
      out[0] = 0.5 * (lo + hi);
      break;
    }
  }
}

Action mean_action(const ParamVector& theta, std::span<const double> s) {
  Action a(theta.spec().action_dim);
  mean_action(theta, s, a);
  return a;
}

std::size_t noise_dim(const PolicySpec& spec) {
  switch (spec.kind) {
    case PolicyKind::tanh_net_gaussian: return spec.action_dim;
    case PolicyKind::uniform_affine: return 1;
    default: return 0;
  }
}

void draw_noise(const PolicySpec& spec, RngStream& rng, std::span<double> out) {
  if (spec.kind == PolicyKind::tanh_net_gaussian) {
    for (auto& z : out) z = rng.normal();
  } else if (spec.kind == PolicyKind::uniform_affine) {
    for (auto& u : out) u = rng.uniform();
  }
}

void action_from_noise(const ParamVector& theta, std::span<const double> s, std::span<const double> noise,
                       std::span<double> out) {
  const auto& spec = theta.spec();
  require(noise.size() >= noise_dim(spec), "not enough noise variates for one action");
  switch (spec.kind) {
    case PolicyKind::tanh_net_gaussian: {
      mean_action(theta, s, out);
      const double sigma = theta.sigma();
      if (sigma > 0.0) {
        for (std::size_t i = 0; i < spec.action_dim; ++i) out[i] += sigma * noise[i];
      }
      break;
    }
    case PolicyKind::uniform_affine: {
      check_dims(theta, s);
      const auto [lo, hi] = uniform_interval(theta, s[0]);
      out[0] = lo + noise[0] * (hi - lo);
      break;
    }
    default:
      mean_action(theta, s, out);
  }
}

ActionSample sample_action_from_noise(const ParamVector& theta, std::span<const double> s,
                                      std::span<const double> noise, bool with_score) {
  ActionSample sample;
  sample.action.resize(theta.spec().action_dim);
  action_from_noise(theta, s, noise, sample.action);
  const auto& spec = theta.spec();
  if (!with_score || !spec.stochastic()) return sample;
  if (spec.kind == PolicyKind::tanh_net_gaussian) {
    if (!(theta.sigma() > 0.0)) {
      sample.degenerate = true;
      return sample;
    }
    sample.log_prob = log_density(theta, s, sample.action);
    sample.score = score_gradient(theta, s, sample.action);
  } else {
    const auto [lo, hi] = uniform_interval(theta, s[0]);
    if (!(hi > lo)) {
      sample.degenerate = true;
      return sample;
    }
    sample.log_prob = -std::log(hi - lo);
  }
  return sample;
}

ActionSample sample_action(const ParamVector& theta, std::span<const double> s, RngStream& rng,
                           bool with_score) {
  std::array<double, kMaxActionDim> noise{};
  const std::span<double> z(noise.data(), noise_dim(theta.spec()));
  draw_noise(theta.spec(), rng, z);
  return sample_action_from_noise(theta, s, z, with_score);
}

double log_density(const ParamVector& theta, std::span<const double> s, std::span<const double> a) {
  const auto& spec = theta.spec();
  require(spec.kind == PolicyKind::tanh_net_gaussian, "log_density requires the Gaussian policy");
  const double sigma = theta.sigma();
  if (!(sigma > 0.0)) throw Error(ErrorKind::degenerate_density, "log-density requested at sigma = 0");
  std::array<double, kMaxActionDim> u{};
  mean_action(theta, s, std::span<double>(u.data(), spec.action_dim));
  double sq = 0.0;
  for (std::size_t i = 0; i < spec.action_dim; ++i) sq += (a[i] - u[i]) * (a[i] - u[i]);
  const double m = static_cast<double>(spec.action_dim);
  return -0.5 * sq / (sigma * sigma) - m * theta.log_sigma() - 0.5 * m * std::log(2.0 * std::numbers::pi);
}

void score_gradient(const ParamVector& theta, std::span<const double> s, std::span<const double> a,
                    std::span<double> out) {
  const auto& spec = theta.spec();
  require(spec.kind == PolicyKind::tanh_net_gaussian, "score_gradient requires the Gaussian policy");
  require(out.size() == theta.size(), "score buffer has wrong dimension");
  check_dims(theta, s);
  const double sigma = theta.sigma();
  if (!(sigma > 0.0)) throw Error(ErrorKind::degenerate_density, "score requested at sigma = 0");

  const std::size_t n = spec.state_dim, m = spec.action_dim, r = spec.hidden;
  std::array<double, kMaxHidden> hidden;
  std::array<double, kMaxActionDim> u{};
  net_forward(theta, s, std::span<double>(hidden.data(), r), std::span<double>(u.data(), m));

  const double var = sigma * sigma;
  std::array<double, kMaxActionDim> delta{};
  double sq = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double resid = a[k] - u[k];
    delta[k] = resid / var;
    sq += resid * resid;
  }
  const auto w2 = theta.w2();
  double* g_w1 = out.data();
  double* g_w2 = out.data() + r * n;
  for (std::size_t i = 0; i < r; ++i) {
    double back = 0.0;
    for (std::size_t k = 0; k < m; ++k) back += w2[k * r + i] * delta[k];
    back *= 1.0 - hidden[i] * hidden[i];
    for (std::size_t j = 0; j < n; ++j) g_w1[i * n + j] = back * s[j];
  }
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t i = 0; i < r; ++i) g_w2[k * r + i] = delta[k] * hidden[i];
  }
  out.back() = sq / var - static_cast<double>(m);
}

std::vector<double> score_gradient(const ParamVector& theta, std::span<const double> s,
                                   std::span<const double> a) {
  std::vector<double> g(theta.size());
  score_gradient(theta, s, a, g);
  return g;
}

}  // namespace fractalscape
