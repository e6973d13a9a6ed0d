#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fractalscape/parallel.hpp"

namespace fractalscape {

/// Pinned pipelines for the landscape figures.
///
///   fig2  logistic sweeps of J over the linear gain for several gammas, plus
///         the MLE along the same gain range.
///   fig3  pendulum, tanh net (r = 8): theta0 ~ N(0, 0.05^2), gradient
///         estimate, deterministic and single-path scans, Hoelder fit.
///   fig4  the fig3 pipeline on the acrobot.
struct ReproConfig {
  std::string figure;
  std::uint64_t master_seed = 0;
  std::vector<double> gammas;
  std::size_t horizon = 1000;

  // fig2
  double sweep_lo = 3.3;
  double sweep_hi = 3.9;
  std::size_t sweep_points = 2000;
  std::size_t mle_points = 121;
  std::size_t mle_t_max = 2000;

  // fig3 / fig4
  std::size_t hidden = 8;
  double sigma0 = 0.1;
  std::size_t episodes = 256;
  std::size_t scan_steps = 200;
  double step_size = 1e-7;
  bool normalize = false;
  bool scan_sigma = false;
  /// gammas at which the single-path stochastic scan is also written.
  std::vector<double> stochastic_gammas;
  double sigma_lo = 1e-5;
  double sigma_hi = 1e-2;
  std::size_t sigma_points = 12;
  std::size_t holder_samples = 200;

  /// Defaults for fig2 | fig3 | fig4; throws invalid_argument otherwise.
  static ReproConfig for_figure(const std::string& figure);

  void validate() const;
  nlohmann::json to_json() const;
  static ReproConfig from_json(const nlohmann::json& j);
};

struct ReproResult {
  /// Figure-specific numbers (fits, MLEs, gradient norms).
  nlohmann::json summary;
  /// Files written, relative to the output directory, in creation order.
  std::vector<std::string> outputs;
};

/// Runs the pipeline and writes its CSVs into out_dir (created if needed).
/// Every random draw comes from cfg.master_seed, so the CSVs are bitwise
/// identical for any exec mode and thread count.
ReproResult run_repro(const ReproConfig& cfg, const std::filesystem::path& out_dir, Exec exec = Exec::parallel);

/// Manifest: config echo, version, master seed, thread count, wall clock and
/// output list. Written as manifest.json next to the outputs.
nlohmann::json make_manifest(const ReproConfig& cfg, const ReproResult& result, int threads, double wall_seconds);

/// Reads the config block back out of a manifest file.
ReproConfig config_from_manifest(const std::filesystem::path& manifest_path);

}  // namespace fractalscape
