#pragma once

// Experiment configuration: block-structured key = value text, strictly
// typed. Unknown blocks or keys are errors.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wfldp/core_model.hpp"
#include "wfldp/partition_measures.hpp"

namespace wfldp {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

enum class ExperimentKind {
  EquilibriumScan,
  PathTube,
  Minimize,
  PartitionEntropy,
  GirsanovCheck,
  Simulate,
  Action,
  QuasiPotential,
};

std::string to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_kind(const std::string& name);

struct ModelBlock {
  double theta = 1.0;
  std::vector<double> p;
  std::vector<double> gammas;  // one entry for single-gamma experiments
};

struct SimBlock {
  double dt = 1e-3;
  double t_end = 1.0;
  std::size_t trajectories = 1000;
  std::size_t record_stride = 1;
  std::uint64_t seed = 0;
  double boundary_floor = 0.0;
  std::optional<std::vector<double>> start;  // default: p
};

enum class TubeCenter { Flow, Minimizer, File };
enum class TubeMethod { Plain, Tilted };

struct EventBlock {
  std::optional<std::vector<double>> lower, upper;
  TubeCenter center = TubeCenter::Flow;
  std::filesystem::path center_file;
  std::optional<std::vector<double>> end;  // minimizer-center endpoint
  double delta = 0.05;
  TubeMethod method = TubeMethod::Plain;
  bool compare = false;
};

struct ScanBlock {
  bool monte_carlo = false;
  std::size_t samples = 100000;
  double resolution = 1e-4;
};

struct MinimizeBlock {
  std::optional<std::vector<double>> start, end;
  double horizon = 1.0;
  std::size_t knots = 64;
  std::size_t max_iters = 50000;
  double grad_tol = 1e-8;
  std::vector<double> horizons = {1, 2, 5, 10, 20, 40};
};

struct PartitionBlock {
  std::vector<Atom> mu_atoms, nu_atoms;
  std::vector<DensityPiece> mu_density, nu_density;
  unsigned max_level = 12;
  bool structural = true;
};

struct ExperimentConfig {
  std::optional<ExperimentKind> kind;
  ModelBlock model;
  std::optional<FitnessMatrix> fitness;
  SimBlock sim;
  EventBlock event;
  ScanBlock scan;
  MinimizeBlock minimize;
  std::filesystem::path path_file;
  PartitionBlock partition;
  std::filesystem::path output_dir = "out";
  /// Every key as written, "block.key" -> value.
  std::map<std::string, std::string> echo;

  /// Params with gamma = first listed gamma.
  ModelParams params() const;
};

/// Relative file names resolve against `base_dir`.
ExperimentConfig parse_config(std::istream& is, const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& file);

}  // namespace wfldp
