#pragma once

// Euler-Maruyama for the finite-allele Wright-Fisher SDE
//
//   dx = [b(x) + r(x)] dt + eps sigma(x) dB,   sigma sigma' = D(x),
//
// on the (n-1)-coordinate chart, with x_n = 1 - sum of the others, plus
// Girsanov likelihood ratios between drift-tilted versions of the same SDE.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "wfldp/core_model.hpp"
#include "wfldp/path_grid.hpp"

namespace wfldp {

struct SimConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  std::size_t record_stride = 1;
  /// Coordinates on supp(p) are lifted to this value after each step.
  double boundary_floor = 0.0;
  std::uint64_t seed = 0;
  /// Drop the noise term (the gamma -> 0 flow).
  bool zero_noise = false;

  /// Number of Euler steps; throws DomainError if the config is inconsistent.
  std::size_t steps() const;
  void validate() const { (void)steps(); }
};

struct Trajectory {
  PathGrid grid;
  /// log dP_target / dP_simulated accumulated at step resolution, when asked for.
  std::optional<double> girsanov_log_weight;
  std::uint64_t seed;
  std::uint64_t stream;
  SimConfig config;
  ModelParams params;
};

/// Lower-triangular (n-1) x (n-1) factor of D(x) restricted to the first n-1
/// coordinates. Columns whose pivot falls below 1e-14 are truncated to zero,
/// which covers boundary points where D is rank deficient.
struct CholeskyFactor {
  std::size_t dim;
  std::vector<double> lower;  // row-major
  double operator()(std::size_t i, std::size_t j) const noexcept { return lower[i * dim + j]; }
};

CholeskyFactor factor_covariance(const SimplexPoint& x);

/// Drift tilts of the base (mutation-only) SDE. The simulated drift is
///   b(x) + D(x) [V_sim x + h_s]
/// where h_s is an optional per-step control. When `track_weight` is set the
/// simulator also accumulates log dP_target / dP_sim for the target law with
/// drift b(x) + D(x) V_target x (neutral if target_fitness is empty).
struct SimulationLaw {
  std::optional<FitnessMatrix> fitness;
  /// steps x n row-major values of h_s; size must match the config.
  std::optional<std::vector<double>> control;
  bool track_weight = false;
  std::optional<FitnessMatrix> target_fitness;
};

/// Simulates one path. `stream` selects the random stream under cfg.seed, so
/// ensemble member i uses stream i.
Trajectory simulate(const ModelParams& params, const std::optional<FitnessMatrix>& V,
                    const SimConfig& cfg, const SimplexPoint& start, std::uint64_t stream = 0);
Trajectory simulate(const ModelParams& params, const SimulationLaw& law, const SimConfig& cfg,
                    const SimplexPoint& start, std::uint64_t stream = 0);

/// (1/gamma) G_V evaluated on the recorded grid of a neutrally simulated
/// trajectory:  G_V = sum (V x_s)' dM_s - 1/2 sum (V x_s)' D(x_s) (V x_s) dt,
/// dM_s = dx_s - b(x_s) dt, left-endpoint evaluation. exp of the result is
/// the density of the selective law with respect to the neutral one.
double girsanov_log_weight(const ModelParams& params, const FitnessMatrix& V, const Trajectory& traj);

/// RK4 solution of x' = b(x) + r(x) sampled at `times` (times[0] is the start
/// time), with `substeps` RK4 steps per sampling interval.
PathGrid deterministic_flow(const ModelParams& params, const std::optional<FitnessMatrix>& V,
                            const SimplexPoint& start, const std::vector<double>& times,
                            std::size_t substeps = 16);

/// Uniform time grid 0, h, 2h, ..., T with h = dt * record_stride.
std::vector<double> recorded_times(const SimConfig& cfg);

}  // namespace wfldp
