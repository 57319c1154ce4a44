#pragma once

// Experiment driver: runs one configured experiment and writes results.csv
// and summary.json into the output directory.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wfldp/harness_config.hpp"
#include "wfldp/path_grid.hpp"
#include "wfldp/wf_simulator.hpp"

namespace wfldp {

inline constexpr const char* kVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Euclidean distance between the first n-1 coordinates.
double chart_distance(std::span<const double> a, std::span<const double> b);

struct TubeEstimate {
  double gamma;
  std::uint64_t seed;
  std::size_t trajectories;
  double probability;
  double ci_low, ci_high;  // 95%
  double scaled_log;       // gamma log P (upper-bound based when zero_hit)
  bool zero_hit;
  double hits;  // weighted hit mass for the tilted estimator
  double ess;   // effective sample size of the hitting weights
};

/// Per-step control h_s = c(t_s) / phi(t_s) with c = phi' - (b + r)(phi), so
/// that b + r + D(phi) h reproduces the center's velocity on the center.
std::vector<double> tube_control(const ModelParams& params, const std::optional<FitnessMatrix>& V,
                                 const SimConfig& cfg, const PathGrid& center);

/// Fraction of paths started at center(0) whose recorded knots all stay
/// within delta of the center (Wilson interval), or with `tilted` the
/// Girsanov-weighted estimate under the center-following drift (normal
/// interval from the weighted standard error).
TubeEstimate estimate_tube_probability(const ModelParams& params, const std::optional<FitnessMatrix>& V,
                                       const SimConfig& cfg, const PathGrid& center, double delta,
                                       std::size_t trajectories, std::uint64_t seed, bool tilted = false);

/// Smallest minimized action from center(0) to a grid of endpoints within
/// delta of center(T) (n = 2 or 3). Ignores the constraint at interior times.
double tube_endpoint_action(const ModelParams& params, const std::optional<FitnessMatrix>& V,
                            const PathGrid& center, double delta, std::size_t knots);

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  int threads = 0;
  /// Kind implied by the CLI subcommand; must agree with the config's.
  std::optional<ExperimentKind> kind;
};

/// Runs the experiment; returns an exit code and reports problems on `err`.
int run_experiment(const ExperimentConfig& cfg, const RunOptions& options, std::ostream& err);
/// Loads the config file first; config errors map to kExitConfig.
int run_experiment_file(const std::filesystem::path& config, const RunOptions& options, std::ostream& err);

}  // namespace wfldp
