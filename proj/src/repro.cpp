#include "fractalscape/repro.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "fractalscape/envs.hpp"
#include "fractalscape/error.hpp"
#include "fractalscape/holder.hpp"
#include "fractalscape/landscape.hpp"
#include "fractalscape/lyapunov.hpp"
#include "fractalscape/policygrad.hpp"
#include "fractalscape/rng.hpp"
#include "fractalscape/rollout.hpp"
#include "fractalscape/theta_io.hpp"

namespace fractalscape {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string gamma_tag(double gamma) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "g%g", gamma);
  return buf;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class OutputDir {
 public:
  explicit OutputDir(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  std::ofstream open(const std::string& name, ReproResult& result) const {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw Error(ErrorKind::invalid_argument, "cannot write " + (dir_ / name).string());
    result.outputs.push_back(name);
    return out;
  }

 private:
  fs::path dir_;
};

bool contains(const std::vector<double>& xs, double x) {
  for (double v : xs) {
    if (v == x) return true;
  }
  return false;
}

json roughness_json(const Roughness& r) {
  return {{"total_variation", r.total_variation}, {"max_second_divided_difference", r.max_second_divided_difference}};
}

ReproResult run_fig2(const ReproConfig& cfg, const OutputDir& out, Exec exec) {
  ReproResult result;
  const EnvModel env = EnvModel::make(EnvKind::logistic);
  const PolicySpec spec = PolicySpec::linear();

  json sweeps = json::array();
  for (double gamma : cfg.gammas) {
    RolloutConfig rc;
    rc.gamma = gamma;
    rc.horizon = cfg.horizon;
    rc.s0 = env.default_initial_state();
    rc.master_seed = cfg.master_seed;
    rc.exec = exec;
    const SweepResult sw = sweep(env, spec, cfg.sweep_lo, cfg.sweep_hi, cfg.sweep_points, rc);
    auto file = out.open("sweep_" + gamma_tag(gamma) + ".csv", result);
    write_sweep_csv(file, sw);
    sweeps.push_back({{"gamma", gamma},
                      {"roughness", roughness_json(roughness(sw))},
                      {"tail_bound", sw.tail_bound},
                      {"gaps", sw.gaps.size()}});
  }

  std::vector<double> grid(cfg.mle_points);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid.size() == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(grid.size() - 1);
    grid[i] = cfg.sweep_lo + t * (cfg.sweep_hi - cfg.sweep_lo);
  }
  MleConfig mc;
  mc.t_max = cfg.mle_t_max;
  mc.seed = cfg.master_seed;
  mc.exec = exec;
  const auto points = mle_sweep(env, spec, grid, env.default_initial_state(), mc);
  auto file = out.open("mle_sweep.csv", result);
  file << "theta,lambda\n";
  std::size_t positive = 0;
  for (const auto& p : points) {
    const double lambda = p.error ? NAN : p.estimate.lambda;
    if (lambda > 0.0) ++positive;
    file << fmt17(p.theta) << ',' << fmt17(lambda) << '\n';
  }

  result.summary = {{"figure", "fig2"},
                    {"env", "logistic"},
                    {"sweeps", sweeps},
                    {"mle_points", points.size()},
                    {"mle_positive_fraction", static_cast<double>(positive) / static_cast<double>(points.size())}};
  return result;
}

ReproResult run_scan_figure(const ReproConfig& cfg, EnvKind kind, const OutputDir& out, Exec exec) {
  ReproResult result;
  const EnvModel env = EnvModel::make(kind);
  const PolicySpec spec = PolicySpec::tanh_net(env.state_dim(), env.action_dim(), cfg.hidden, true);
  RngStream init(cfg.master_seed, StreamTag::init, 0);
  const ParamVector theta0 = ParamVector::random_normal(spec, init, 0.05, cfg.sigma0);
  {
    auto file = out.open("theta0.csv", result);
    write_theta(file, theta0);
  }
  const State s0 = env.default_initial_state();
  const std::size_t sigma_slot = *theta0.log_sigma_index();

  MleConfig mc;
  mc.seed = cfg.master_seed;
  mc.exec = exec;
  const MleEstimate mle = estimate_mle(env, theta0, s0, mc);

  json per_gamma = json::array();
  for (double gamma : cfg.gammas) {
    const std::string tag = gamma_tag(gamma);
    json entry = {{"gamma", gamma}};

    GradConfig gc;
    gc.n_episodes = cfg.episodes;
    gc.gamma = gamma;
    gc.horizon = cfg.horizon;
    gc.s0 = s0;
    gc.master_seed = cfg.master_seed;
    gc.exec = exec;
    const GradEstimate grad = estimate_gradient(env, theta0, gc);
    {
      auto file = out.open("grad_" + tag + ".csv", result);
      for (std::size_t i = 0; i < grad.eta.size(); ++i) file << (i ? "," : "") << fmt17(grad.eta[i]);
      file << '\n';
    }
    entry["grad_norm"] = grad.norm;

    std::vector<double> direction = grad.eta;
    if (!cfg.scan_sigma) direction[sigma_slot] = 0.0;
    if (cfg.normalize) {
      double n2 = 0.0;
      for (double d : direction) n2 += d * d;
      require(n2 > 0.0, "cannot normalize a zero gradient");
      const double inv = 1.0 / std::sqrt(n2);
      for (double& d : direction) d *= inv;
    }

    RolloutConfig rc;
    rc.gamma = gamma;
    rc.horizon = cfg.horizon;
    rc.s0 = s0;
    rc.master_seed = cfg.master_seed;
    rc.n_paths = 1;
    rc.exec = exec;
    const ScanResult det = scan(env, theta0, direction, cfg.scan_steps, cfg.step_size, rc);
    {
      auto file = out.open("scan_" + tag + "_det.csv", result);
      write_scan_csv(file, det);
    }
    entry["scan_roughness"] = roughness_json(roughness(det));
    entry["scan_gaps"] = det.gaps.size();

    if (contains(cfg.stochastic_gammas, gamma)) {
      rc.mode = EvalMode::stochastic;
      const ScanResult sto = scan(env, theta0, direction, cfg.scan_steps, cfg.step_size, rc);
      auto file = out.open("scan_" + tag + "_stoch.csv", result);
      write_scan_csv(file, sto);
      entry["stochastic_scan_roughness"] = roughness_json(roughness(sto));
    }

    HolderConfig hc;
    hc.sigma_grid = log_spaced(cfg.sigma_lo, cfg.sigma_hi, cfg.sigma_points);
    hc.n_samples = cfg.holder_samples;
    hc.master_seed = cfg.master_seed;
    hc.frozen = {sigma_slot};
    hc.exec = exec;
    const Objective J = [&](std::span<const double> x) {
      return discounted_cost(env, theta0.with_values({x.begin(), x.end()}), s0, gamma, cfg.horizon);
    };
    const double tb = tail_bound(env, gamma, cfg.horizon);
    const HolderFit fit = estimate_holder(J, theta0.values(), hc, tb);
    {
      auto file = out.open("holder_" + tag + ".csv", result);
      file << "sigma,variance,degenerate,j_min,j_max\n";
      for (const auto& p : fit.pairs) {
        file << fmt17(p.sigma) << ',' << fmt17(p.variance) << ',' << (p.degenerate ? 1 : 0) << ','
             << fmt17(p.j_min) << ',' << fmt17(p.j_max) << '\n';
      }
    }
    entry["holder"] = {{"slope", fit.slope},
                       {"intercept", fit.intercept},
                       {"r2", fit.r_squared},
                       {"alpha", fit.alpha},
                       {"class", to_string(fit.classification)},
                       {"warnings", fit.warnings}};
    entry["tail_bound"] = tb;
    per_gamma.push_back(entry);
  }

  result.summary = {{"figure", cfg.figure},
                    {"env", std::string(env.name())},
                    {"param_count", theta0.size()},
                    {"mle", {{"lambda", mle.lambda}, {"n_renorms", mle.n_renorms}, {"censored", mle.censored}}},
                    {"gammas", per_gamma}};
  return result;
}

}  // namespace

ReproConfig ReproConfig::for_figure(const std::string& figure) {
  ReproConfig c;
  c.figure = figure;
  if (figure == "fig2") {
    c.gammas = {0.5, 0.9, 0.99};
  } else if (figure == "fig3") {
    c.gammas = {0.9, 0.99};
    c.stochastic_gammas = {0.9, 0.99};
  } else if (figure == "fig4") {
    c.gammas = {0.8, 0.9, 0.99};
    c.stochastic_gammas = {0.99};
  } else {
    throw Error(ErrorKind::invalid_argument, "unknown figure '" + figure + "' (expected fig2|fig3|fig4)");
  }
  return c;
}

void ReproConfig::validate() const {
  require(figure == "fig2" || figure == "fig3" || figure == "fig4", "unknown figure '" + figure + "'");
  require(!gammas.empty(), "repro needs at least one gamma");
  for (double g : gammas) require(g > 0.0 && g < 1.0, "gamma must lie in (0, 1)");
  require(horizon >= 1, "horizon must be >= 1");
  if (figure == "fig2") {
    require(sweep_lo < sweep_hi && sweep_points >= 3, "sweep needs lo < hi and >= 3 points");
    require(mle_points >= 1 && mle_t_max >= 1, "mle sweep needs >= 1 point and t_max >= 1");
  } else {
    require(hidden >= 1 && sigma0 > 0.0, "hidden >= 1 and sigma0 > 0 required");
    require(episodes >= 1 && scan_steps >= 3 && step_size > 0.0, "episodes >= 1, scan_steps >= 3, step_size > 0");
    require(sigma_lo > 0.0 && sigma_lo < sigma_hi && sigma_points >= 4, "sigma grid must be 0 < lo < hi, >= 4 points");
    require(holder_samples >= 30, "holder needs >= 30 samples");
  }
}

json ReproConfig::to_json() const {
  return {{"figure", figure},
          {"master_seed", master_seed},
          {"gammas", gammas},
          {"horizon", horizon},
          {"sweep_lo", sweep_lo},
          {"sweep_hi", sweep_hi},
          {"sweep_points", sweep_points},
          {"mle_points", mle_points},
          {"mle_t_max", mle_t_max},
          {"hidden", hidden},
          {"sigma0", sigma0},
          {"episodes", episodes},
          {"scan_steps", scan_steps},
          {"step_size", step_size},
          {"normalize", normalize},
          {"scan_sigma", scan_sigma},
          {"stochastic_gammas", stochastic_gammas},
          {"sigma_lo", sigma_lo},
          {"sigma_hi", sigma_hi},
          {"sigma_points", sigma_points},
          {"holder_samples", holder_samples}};
}

ReproConfig ReproConfig::from_json(const json& j) {
  try {
    ReproConfig c = for_figure(j.at("figure").get<std::string>());
    auto load = [&](const char* key, auto& field) {
      if (j.contains(key)) j.at(key).get_to(field);
    };
    load("master_seed", c.master_seed);
    load("gammas", c.gammas);
    load("horizon", c.horizon);
    load("sweep_lo", c.sweep_lo);
    load("sweep_hi", c.sweep_hi);
    load("sweep_points", c.sweep_points);
    load("mle_points", c.mle_points);
    load("mle_t_max", c.mle_t_max);
    load("hidden", c.hidden);
    load("sigma0", c.sigma0);
    load("episodes", c.episodes);
    load("scan_steps", c.scan_steps);
    load("step_size", c.step_size);
    load("normalize", c.normalize);
    load("scan_sigma", c.scan_sigma);
    load("stochastic_gammas", c.stochastic_gammas);
    load("sigma_lo", c.sigma_lo);
    load("sigma_hi", c.sigma_hi);
    load("sigma_points", c.sigma_points);
    load("holder_samples", c.holder_samples);
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::invalid_argument, std::string("bad repro config: ") + e.what());
  }
}

ReproResult run_repro(const ReproConfig& cfg, const fs::path& out_dir, Exec exec) {
  cfg.validate();
  const OutputDir out(out_dir);
  if (cfg.figure == "fig2") return run_fig2(cfg, out, exec);
  return run_scan_figure(cfg, cfg.figure == "fig3" ? EnvKind::pendulum : EnvKind::acrobot, out, exec);
}

json make_manifest(const ReproConfig& cfg, const ReproResult& result, int threads, double wall_seconds) {
  return {{"artifact", "fractalscape"},
          {"version", FRACTALSCAPE_VERSION},
          {"command", "repro"},
          {"master_seed", cfg.master_seed},
          {"threads", threads},
          {"wall_clock_seconds", wall_seconds},
          {"outputs", result.outputs},
          {"config", cfg.to_json()},
          {"summary", result.summary}};
}

ReproConfig config_from_manifest(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw Error(ErrorKind::invalid_argument, "cannot read manifest " + manifest_path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::invalid_argument, std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!j.contains("config")) throw Error(ErrorKind::invalid_argument, "manifest has no config block");
  return ReproConfig::from_json(j.at("config"));
}

}  // namespace fractalscape
