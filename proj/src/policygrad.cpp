#include "fractalscape/policygrad.hpp"

#include <cmath>

#include "fractalscape/error.hpp"
#include "fractalscape/rollout.hpp"

namespace fractalscape {

void GradConfig::validate() const {
  require(n_episodes >= 1, "need at least one episode");
  require(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0, 1)");
  require(horizon >= 1, "horizon must be at least 1");
}

std::vector<double> reward_to_go(std::span<const double> costs, double gamma) {
  std::vector<double> g(costs.size());
  double acc = 0.0;
  for (std::size_t t = costs.size(); t-- > 0;) {
    acc = costs[t] + gamma * acc;
    g[t] = acc;
  }
  return g;
}

std::vector<double> baseline_value(std::span<const std::vector<double>> returns, Baseline baseline) {
  require(!returns.empty(), "baseline needs at least one episode");
  std::vector<double> b(returns.front().size(), 0.0);
  if (baseline == Baseline::none) return b;
  for (const auto& g : returns) {
    require(g.size() == b.size(), "episodes differ in length");
    for (std::size_t t = 0; t < b.size(); ++t) b[t] += g[t];
  }
  for (auto& x : b) x /= static_cast<double>(returns.size());
  return b;
}

namespace {

// Shared by both entry points: score_at(e, t, out) fills the score of
// episode e at step t.
template <class ScoreAt>
GradEstimate accumulate(std::span<const std::vector<double>> costs, std::size_t p, const GradConfig& cfg,
                        ScoreAt score_at) {
  const std::size_t n = costs.size();
  std::vector<std::vector<double>> returns(n);
  for (std::size_t e = 0; e < n; ++e) returns[e] = reward_to_go(costs[e], cfg.gamma);
  const auto base = baseline_value(returns, cfg.baseline);

  std::vector<std::vector<double>> contrib(n, std::vector<double>(p, 0.0));
  for_each_index(n, cfg.exec, [&](std::size_t e) {
    std::vector<double> score(p);
    double weight = 1.0;
    for (std::size_t t = 0; t < returns[e].size(); ++t) {
      const double advantage = returns[e][t] - base[t];
      const double w = (cfg.discounted_visitation ? weight : 1.0) * advantage;
      weight *= cfg.gamma;
      if (w == 0.0) continue;
      score_at(e, t, std::span<double>(score));
      for (std::size_t j = 0; j < p; ++j) contrib[e][j] += w * score[j];
    }
  });

  GradEstimate est;
  est.eta.assign(p, 0.0);
  for (const auto& c : contrib) {
    for (std::size_t j = 0; j < p; ++j) est.eta[j] += c[j];
  }
  double sq = 0.0;
  for (auto& x : est.eta) {
    x /= static_cast<double>(n);
    sq += x * x;
  }
  est.norm = std::sqrt(sq);
  est.n_episodes = n;
  return est;
}

}  // namespace

GradEstimate gradient_from_episodes(std::span<const Episode> episodes, const GradConfig& cfg) {
  require(!episodes.empty(), "need at least one episode");
  const std::size_t p = episodes.front().scores.empty() ? 0 : episodes.front().scores.front().size();
  std::vector<std::vector<double>> costs;
  costs.reserve(episodes.size());
  for (const auto& ep : episodes) {
    require(ep.scores.size() == ep.costs.size(), "episode scores and costs differ in length");
    costs.push_back(ep.costs);
  }
  GradConfig local = cfg;
  local.n_episodes = episodes.size();
  return accumulate(costs, p, local, [&](std::size_t e, std::size_t t, std::span<double> out) {
    const auto& s = episodes[e].scores[t];
    std::copy(s.begin(), s.end(), out.begin());
  });
}

GradEstimate estimate_gradient(const EnvModel& env, const ParamVector& theta, const GradConfig& cfg) {
  cfg.validate();
  require(theta.spec().kind == PolicyKind::tanh_net_gaussian, "gradient estimation needs the Gaussian policy");
  if (!(theta.sigma() > 0.0)) throw Error(ErrorKind::degenerate_density, "policy gradient requested at sigma = 0");

  RolloutConfig rc;
  rc.gamma = cfg.gamma;
  rc.horizon = cfg.horizon;
  rc.s0 = cfg.s0;
  rc.mode = EvalMode::stochastic;
  rc.master_seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(StreamTag::grad));
  rc.common_random_numbers = true;

  // Keep states and sampled actions only; scores are recomputed on demand.
  std::vector<Trajectory> trajs(cfg.n_episodes);
  for_each_index(cfg.n_episodes, cfg.exec, [&](std::size_t e) {
    trajs[e] = rollout(env, theta, rc, e, RolloutOptions{.record_scores = false});
  });
  std::vector<std::vector<double>> costs(cfg.n_episodes);
  for (std::size_t e = 0; e < cfg.n_episodes; ++e) costs[e] = std::move(trajs[e].costs);

  return accumulate(costs, theta.size(), cfg, [&](std::size_t e, std::size_t t, std::span<double> out) {
    score_gradient(theta, trajs[e].states[t], trajs[e].sampled_actions[t], out);
  });
}

}  // namespace fractalscape
