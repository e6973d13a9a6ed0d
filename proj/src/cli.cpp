#include "fractalscape/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fractalscape/envs.hpp"
#include "fractalscape/error.hpp"
#include "fractalscape/holder.hpp"
#include "fractalscape/landscape.hpp"
#include "fractalscape/lyapunov.hpp"
#include "fractalscape/policygrad.hpp"
#include "fractalscape/policies.hpp"
#include "fractalscape/repro.hpp"
#include "fractalscape/rng.hpp"
#include "fractalscape/rollout.hpp"
#include "fractalscape/theta_io.hpp"

namespace fractalscape::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Grid {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t n = 0;
};

/// "lo:hi:n"
Grid parse_grid(const std::string& text) {
  const auto a = text.find(':');
  const auto b = a == std::string::npos ? std::string::npos : text.find(':', a + 1);
  require(b != std::string::npos, "grid must look like lo:hi:n, got '" + text + "'");
  Grid g;
  try {
    std::size_t used = 0;
    g.lo = std::stod(text.substr(0, a));
    g.hi = std::stod(text.substr(a + 1, b - a - 1));
    const auto n = std::stoll(text.substr(b + 1), &used);
    require(used == text.size() - b - 1 && n >= 1, "grid count must be a positive integer");
    g.n = static_cast<std::size_t>(n);
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::invalid_argument, "grid must look like lo:hi:n, got '" + text + "'");
  }
  require(g.lo < g.hi || (g.lo == g.hi && g.n == 1), "grid needs lo < hi");
  return g;
}

std::vector<double> linear_grid(const Grid& g) {
  std::vector<double> xs(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    const double t = g.n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(g.n - 1);
    xs[i] = g.lo + t * (g.hi - g.lo);
  }
  return xs;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Options shared by every subcommand; they sit on the root app and
/// subcommands fall through to it.
struct Common {
  std::string env = "pendulum";
  std::string policy = "tanh-net";
  std::size_t hidden = 8;
  double sigma = 0.1;
  double beta = 1.0;
  double gamma = 0.99;
  std::size_t horizon = 1000;
  std::string theta;
  std::string s0;
  std::uint64_t seed = 0;
  int threads = 0;
  bool stochastic = false;
  std::size_t paths = 16;
  std::string out;
  bool serial = false;
  bool scan_sigma = false;

  CLI::Option* sigma_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
};

struct Context {
  EnvModel env;
  ParamVector theta;
  State s0;
  Exec exec;
};

PolicySpec spec_from_flags(const Common& c, const EnvModel& env) {
  const PolicyKind kind = PolicySpec::kind_from_name(c.policy);
  switch (kind) {
    case PolicyKind::linear_det:
      return PolicySpec::linear(env.state_dim(), env.action_dim());
    case PolicyKind::tanh_net_det:
      return PolicySpec::tanh_net(env.state_dim(), env.action_dim(), c.hidden, false);
    case PolicyKind::tanh_net_gaussian:
      return PolicySpec::tanh_net(env.state_dim(), env.action_dim(), c.hidden, true);
    case PolicyKind::uniform_affine:
      return PolicySpec::uniform(c.beta);
  }
  throw Error(ErrorKind::invalid_argument, "unknown policy");
}

ParamVector load_theta(const Common& c, const EnvModel& env) {
  const PolicySpec flags_spec = spec_from_flags(c, env);
  std::optional<ParamVector> theta;
  if (c.theta.empty()) {
    RngStream rng(c.seed, StreamTag::init, 0);
    theta = ParamVector::random_normal(flags_spec, rng, 0.05, c.sigma);
  } else if (fs::is_regular_file(c.theta)) {
    theta = read_theta(c.theta);
    const PolicySpec& s = theta->spec();
    if (s.kind != PolicyKind::uniform_affine && (s.state_dim != env.state_dim() || s.action_dim != env.action_dim())) {
      throw Error(ErrorKind::layout_mismatch, "theta file layout does not match env " + std::string(env.name()));
    }
  } else {
    theta = ParamVector(flags_spec, parse_number_list(c.theta));
  }
  if (c.sigma_opt->count() > 0 && theta->log_sigma_index()) theta->set_log_sigma(std::log(c.sigma));
  return *theta;
}

Context make_context(const Common& c) {
  Context ctx{EnvModel::from_name(c.env), ParamVector::zeros(PolicySpec::linear()), {}, Exec::parallel};
  ctx.theta = load_theta(c, ctx.env);
  if (c.s0.empty()) {
    ctx.s0 = ctx.env.default_initial_state();
  } else {
    ctx.s0 = parse_number_list(c.s0);
    require(ctx.s0.size() == ctx.env.state_dim(), "--s0 has the wrong dimension");
  }
  ctx.exec = c.serial ? Exec::serial : Exec::parallel;
  return ctx;
}

RolloutConfig rollout_config(const Common& c, const Context& ctx) {
  RolloutConfig rc;
  rc.gamma = c.gamma;
  rc.horizon = c.horizon;
  rc.s0 = ctx.s0;
  rc.mode = c.stochastic ? EvalMode::stochastic : EvalMode::deterministic;
  rc.n_paths = c.paths;
  rc.master_seed = c.seed;
  rc.exec = ctx.exec;
  rc.validate();
  return rc;
}

json header(const std::string& command, const Common& c, const Context& ctx) {
  return {{"command", command},
          {"env", std::string(ctx.env.name())},
          {"policy", ctx.theta.spec().kind_name()},
          {"param_count", ctx.theta.size()},
          {"seed", c.seed}};
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::invalid_argument, "cannot write " + path);
  return f;
}

void write_row(std::ostream& os, std::span<const double> v) {
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << fmt17(v[i]);
  os << '\n';
}

json mle_json(const MleEstimate& e, double gamma) {
  return {{"lambda", e.lambda},
          {"n_renorms", e.n_renorms},
          {"steps_counted", e.steps_counted},
          {"censored", e.censored},
          {"restart_lambdas", e.restart_lambdas},
          {"neg_log_gamma", -std::log(gamma)},
          {"exceeds_threshold", exceeds_discount_threshold(e.lambda, gamma)}};
}

json fit_json(const HolderFit& fit) {
  json pairs = json::array();
  for (const auto& p : fit.pairs) {
    pairs.push_back({{"sigma", p.sigma}, {"variance", p.variance}, {"degenerate", p.degenerate}});
  }
  return {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r2", fit.r_squared}, {"alpha", fit.alpha},
          {"class", to_string(fit.classification)}, {"warnings", fit.warnings}, {"pairs", pairs}};
}

GradEstimate run_grad(const Common& c, const Context& ctx, std::size_t episodes, bool undiscounted,
                      bool no_baseline) {
  GradConfig gc;
  gc.n_episodes = episodes;
  gc.gamma = c.gamma;
  gc.horizon = c.horizon;
  gc.s0 = ctx.s0;
  gc.baseline = no_baseline ? Baseline::none : Baseline::mean_return;
  gc.discounted_visitation = !undiscounted;
  gc.master_seed = c.seed;
  gc.exec = ctx.exec;
  return estimate_gradient(ctx.env, ctx.theta, gc);
}

int dispatch(CLI::App& app, Common& c, std::ostream& out, std::ostream& err, const std::vector<std::string>& args);

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fractal landscape diagnostics for policy optimization", "fractalscape"};
  app.set_version_flag("--version", FRACTALSCAPE_VERSION);
  app.set_config("--config", "", "TOML/INI file with option values");
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  return dispatch(app, common, out, err, args);
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + (argc > 0 ? 1 : 0), argv + argc);
  return run(args, std::cout, std::cerr);
}

namespace {

int dispatch(CLI::App& app, Common& c, std::ostream& out, std::ostream& err, const std::vector<std::string>& args) {
  app.add_option("--env", c.env, "logistic|sat1d|sat1d-shifted|pendulum|acrobot")->capture_default_str();
  app.add_option("--policy", c.policy, "linear|tanh-net|tanh-net-det|uniform")->capture_default_str();
  app.add_option("--hidden", c.hidden, "hidden width r of the tanh net")->capture_default_str();
  c.sigma_opt = app.add_option("--sigma", c.sigma, "initial Gaussian sigma")->capture_default_str();
  app.add_option("--beta", c.beta, "exponent of the uniform policy")->capture_default_str();
  app.add_option("--gamma", c.gamma, "discount factor")->capture_default_str();
  app.add_option("--horizon", c.horizon, "rollout horizon T")->capture_default_str();
  app.add_option("--theta", c.theta, "theta file, or inline comma-separated values");
  app.add_option("--s0", c.s0, "initial state, comma-separated");
  c.seed_opt = app.add_option("--seed", c.seed, "master seed (FRACTALSCAPE_SEED overrides)")->capture_default_str();
  app.add_option("--threads", c.threads, "worker threads (0 = all cores)")->capture_default_str();
  app.add_flag("--stochastic", c.stochastic, "evaluate the stochastic policy");
  app.add_option("--paths", c.paths, "sample paths for stochastic J / MLE")->capture_default_str();
  app.add_option("--out", c.out, "output file (directory for repro)");
  app.add_flag("--serial", c.serial, "use the serial reference kernels");
  app.add_flag("--scan-sigma", c.scan_sigma, "let scans and Hoelder sampling move the log-sigma entry");

  auto* eval = app.add_subcommand("eval", "J(theta) and the truncation tail bound");

  auto* mle = app.add_subcommand("mle", "maximal Lyapunov exponent of the closed loop");
  std::string mle_grid;
  MleConfig mc;
  mle->add_option("--grid", mle_grid, "lo:hi:n sweep over a one-parameter policy");
  mle->add_option("--t-max", mc.t_max)->capture_default_str();
  mle->add_option("--transient", mc.transient_skip)->capture_default_str();
  mle->add_option("--restarts", mc.restarts)->capture_default_str();
  mle->add_option("--d0", mc.d0)->capture_default_str();

  auto* holder = app.add_subcommand("holder", "Hoelder exponent by variance scaling");
  std::string sigma_grid = "1e-5:1e-2:12";
  std::size_t samples = 200;
  holder->add_option("--sigma-grid", sigma_grid, "lo:hi:n, log-spaced")->capture_default_str();
  holder->add_option("--samples", samples)->capture_default_str();

  auto* grad = app.add_subcommand("grad", "score-function gradient estimate");
  std::size_t episodes = 256;
  bool undiscounted = false;
  bool no_baseline = false;
  grad->add_option("--episodes", episodes)->capture_default_str();
  grad->add_flag("--undiscounted-visitation", undiscounted, "drop the gamma^t weight on the score");
  grad->add_flag("--no-baseline", no_baseline, "use a zero baseline");

  auto* scan_cmd = app.add_subcommand("scan", "J along theta0 + delta * direction");
  std::string direction_arg;
  std::size_t steps = 200;
  double step_size = 1e-7;
  bool normalize = false;
  scan_cmd->add_option("--direction", direction_arg, "direction file or list (default: gradient estimate)");
  scan_cmd->add_option("--steps", steps)->capture_default_str();
  scan_cmd->add_option("--step-size", step_size)->capture_default_str();
  scan_cmd->add_option("--episodes", episodes, "episodes for the gradient direction")->capture_default_str();
  scan_cmd->add_flag("--normalize", normalize, "divide the direction by its norm");

  auto* sweep_cmd = app.add_subcommand("sweep", "J over a grid of a one-parameter policy");
  std::string sweep_grid;
  sweep_cmd->add_option("--grid", sweep_grid, "lo:hi:n")->required();

  auto* repro = app.add_subcommand("repro", "pinned figure pipelines (fig2|fig3|fig4)");
  std::string figure;
  std::string from_manifest;
  repro->add_option("figure", figure, "fig2|fig3|fig4");
  repro->add_option("--from-manifest", from_manifest, "rerun the config recorded in a manifest.json");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalidConfig;
  }

  try {
    if (const char* env_seed = std::getenv("FRACTALSCAPE_SEED"); env_seed && *env_seed) {
      try {
        std::size_t used = 0;
        c.seed = std::stoull(env_seed, &used);
        require(used == std::string(env_seed).size(), "");
      } catch (const std::exception&) {
        throw Error(ErrorKind::invalid_argument, std::string("FRACTALSCAPE_SEED is not an integer: ") + env_seed);
      }
    }
    require(c.threads >= 0, "--threads must be >= 0");
    if (c.threads > 0) set_thread_count(c.threads);

    if (repro->parsed()) {
      ReproConfig rc;
      if (!from_manifest.empty()) {
        rc = config_from_manifest(from_manifest);
        if (c.seed_opt->count() > 0 || std::getenv("FRACTALSCAPE_SEED")) rc.master_seed = c.seed;
      } else {
        require(!figure.empty(), "repro needs a figure id or --from-manifest");
        rc = ReproConfig::for_figure(figure);
        rc.master_seed = c.seed;
      }
      const fs::path dir = c.out.empty() ? fs::path("repro_" + rc.figure) : fs::path(c.out);
      const auto t0 = std::chrono::steady_clock::now();
      const ReproResult result = run_repro(rc, dir, c.serial ? Exec::serial : Exec::parallel);
      const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      const json manifest = make_manifest(rc, result, thread_count(), wall);
      std::ofstream mf = open_out((dir / "manifest.json").string());
      mf << manifest.dump(2) << '\n';
      json report = manifest;
      report["out_dir"] = dir.string();
      out << report.dump(2) << '\n';
      return kExitOk;
    }

    const Context ctx = make_context(c);

    if (eval->parsed()) {
      const RolloutConfig rc = rollout_config(c, ctx);
      json j = header("eval", c, ctx);
      j["gamma"] = c.gamma;
      j["horizon"] = c.horizon;
      j["mode"] = c.stochastic ? "stochastic" : "deterministic";
      if (c.stochastic) j["n_paths"] = c.paths;
      j["J"] = objective(ctx.env, ctx.theta, rc);
      j["tail_bound"] = tail_bound(ctx.env, c.gamma, c.horizon);
      out << j.dump(2) << '\n';
      return kExitOk;
    }

    if (mle->parsed()) {
      mc.n_paths = c.paths;
      mc.seed = c.seed;
      mc.exec = ctx.exec;
      if (!mle_grid.empty()) {
        require(!c.stochastic, "--grid sweeps use the deterministic policy");
        const std::vector<double> grid = linear_grid(parse_grid(mle_grid));
        const auto points = mle_sweep(ctx.env, ctx.theta.spec(), grid, ctx.s0, mc);
        std::ofstream file;
        if (!c.out.empty()) file = open_out(c.out);
        std::ostream& csv = c.out.empty() ? out : file;
        csv << "theta,lambda,n_renorms,censored,error\n";
        for (const auto& p : points) {
          csv << fmt17(p.theta) << ',' << fmt17(p.error ? NAN : p.estimate.lambda) << ',' << p.estimate.n_renorms
              << ',' << (p.estimate.censored ? 1 : 0) << ',' << (p.error ? *p.error : "") << '\n';
        }
        if (!c.out.empty()) {
          json j = header("mle", c, ctx);
          j["grid"] = mle_grid;
          j["points"] = points.size();
          j["csv"] = c.out;
          out << j.dump(2) << '\n';
        }
        return kExitOk;
      }
      const MleEstimate e = c.stochastic ? estimate_mle_stochastic(ctx.env, ctx.theta, ctx.s0, mc)
                                         : estimate_mle(ctx.env, ctx.theta, ctx.s0, mc);
      json j = header("mle", c, ctx);
      j["mode"] = c.stochastic ? "stochastic" : "deterministic";
      j.update(mle_json(e, c.gamma));
      out << j.dump(2) << '\n';
      return kExitOk;
    }

    if (holder->parsed()) {
      const Grid g = parse_grid(sigma_grid);
      require(g.lo > 0.0, "sigma grid must be positive");
      HolderConfig hc;
      hc.sigma_grid = log_spaced(g.lo, g.hi, g.n);
      hc.n_samples = samples;
      hc.master_seed = c.seed;
      hc.exec = ctx.exec;
      if (const auto slot = ctx.theta.log_sigma_index(); slot && !c.scan_sigma) hc.frozen = {*slot};
      RolloutConfig rc = rollout_config(c, ctx);
      rc.exec = Exec::serial;
      const Objective J = [&](std::span<const double> x) {
        return objective(ctx.env, ctx.theta.with_values({x.begin(), x.end()}), rc);
      };
      const double tb = tail_bound(ctx.env, c.gamma, c.horizon);
      const HolderFit fit = estimate_holder(J, ctx.theta.values(), hc, tb);
      if (!c.out.empty()) {
        std::ofstream file = open_out(c.out);
        file << "sigma,variance,degenerate\n";
        for (const auto& p : fit.pairs) {
          file << fmt17(p.sigma) << ',' << fmt17(p.variance) << ',' << (p.degenerate ? 1 : 0) << '\n';
        }
      }
      json j = header("holder", c, ctx);
      j["gamma"] = c.gamma;
      j["horizon"] = c.horizon;
      j["samples"] = samples;
      j["tail_bound"] = tb;
      j.update(fit_json(fit));
      out << j.dump(2) << '\n';
      return kExitOk;
    }

    if (grad->parsed()) {
      const GradEstimate g = run_grad(c, ctx, episodes, undiscounted, no_baseline);
      if (!c.out.empty()) {
        std::ofstream file = open_out(c.out);
        write_row(file, g.eta);
      }
      json j = header("grad", c, ctx);
      j["gamma"] = c.gamma;
      j["horizon"] = c.horizon;
      j["n_episodes"] = g.n_episodes;
      j["discounted_visitation"] = !undiscounted;
      j["baseline"] = no_baseline ? "none" : "mean_return";
      j["norm"] = g.norm;
      j["eta"] = g.eta;
      out << j.dump(2) << '\n';
      return kExitOk;
    }

    if (scan_cmd->parsed()) {
      std::vector<double> direction;
      std::string source;
      if (direction_arg.empty()) {
        direction = run_grad(c, ctx, episodes, false, false).eta;
        source = "gradient";
      } else if (fs::is_regular_file(direction_arg)) {
        std::ifstream in(direction_arg);
        std::string line;
        while (std::getline(in, line) && (line.empty() || line[0] == '#')) {
        }
        direction = parse_number_list(line);
        source = direction_arg;
      } else {
        direction = parse_number_list(direction_arg);
        source = "inline";
      }
      require(direction.size() == ctx.theta.size(), "direction has the wrong dimension");
      if (const auto slot = ctx.theta.log_sigma_index(); slot && !c.scan_sigma) direction[*slot] = 0.0;
      if (normalize) {
        double n2 = 0.0;
        for (double d : direction) n2 += d * d;
        require(n2 > 0.0, "cannot normalize a zero direction");
        for (double& d : direction) d /= std::sqrt(n2);
      }
      RolloutConfig rc = rollout_config(c, ctx);
      rc.n_paths = 1;
      const ScanResult r = scan(ctx.env, ctx.theta, direction, steps, step_size, rc);
      json j = header("scan", c, ctx);
      j["gamma"] = c.gamma;
      j["horizon"] = c.horizon;
      j["mode"] = c.stochastic ? "stochastic_path" : "deterministic";
      j["direction_source"] = source;
      j["direction"] = direction;
      j["steps"] = steps;
      j["step_size"] = step_size;
      j["tail_bound"] = r.tail_bound;
      j["gaps"] = r.gaps;
      if (steps >= 3) {
        const Roughness rough = roughness(r);
        j["total_variation"] = rough.total_variation;
        j["max_second_divided_difference"] = rough.max_second_divided_difference;
      }
      if (!c.out.empty()) {
        std::ofstream file = open_out(c.out);
        write_scan_csv(file, r);
        j["csv"] = c.out;
      } else {
        j["delta"] = r.deltas;
        j["J"] = r.j_values;
      }
      out << j.dump(2) << '\n';
      return kExitOk;
    }

    if (sweep_cmd->parsed()) {
      const Grid g = parse_grid(sweep_grid);
      const RolloutConfig rc = rollout_config(c, ctx);
      require(!c.stochastic, "sweeps use the deterministic policy");
      const SweepResult r = sweep(ctx.env, ctx.theta.spec(), g.lo, g.hi, g.n, rc);
      json j = header("sweep", c, ctx);
      j["gamma"] = c.gamma;
      j["horizon"] = c.horizon;
      j["grid"] = sweep_grid;
      j["tail_bound"] = r.tail_bound;
      j["gaps"] = r.gaps;
      if (g.n >= 3) {
        const Roughness rough = roughness(r);
        j["total_variation"] = rough.total_variation;
        j["max_second_divided_difference"] = rough.max_second_divided_difference;
      }
      if (!c.out.empty()) {
        std::ofstream file = open_out(c.out);
        write_sweep_csv(file, r);
        j["csv"] = c.out;
      } else {
        j["theta"] = r.theta_grid;
        j["J"] = r.j_values;
      }
      out << j.dump(2) << '\n';
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return e.numerical() ? kExitNumerical : kExitInvalidConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalidConfig;
  }
  err << "error: no subcommand\n";
  return kExitInvalidConfig;
}

}  // namespace

}  // namespace fractalscape::cli
