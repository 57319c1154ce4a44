#pragma once

// Fixed-endpoint minimization of the discretized action, and quasi-potentials
// as the running minimum over a horizon schedule.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wfldp/core_model.hpp"
#include "wfldp/path_grid.hpp"

namespace wfldp {

/// Logistic chart of the simplex face spanned by supp(p): a point x with
/// x_i > 0 on the support is z_j = log(x_{s_j} / x_{s_last}), j < |S| - 1.
/// Coordinates off the support are fixed at 0.
class KnotChart {
 public:
  explicit KnotChart(const SimplexPoint& p);

  std::size_t dimension() const noexcept { return n_; }
  /// Number of chart coordinates per knot (|supp p| - 1).
  std::size_t chart_dim() const noexcept { return support_.size() - 1; }
  const std::vector<std::size_t>& support() const noexcept { return support_; }

  void encode(std::span<const double> x, std::span<double> z) const;
  void decode(std::span<const double> z, std::span<double> x) const;
  /// Chain rule: given d/dx (independent coordinates) at x, writes d/dz.
  void pullback(std::span<const double> x, std::span<const double> gx, std::span<double> gz) const;

 private:
  std::size_t n_;
  std::vector<std::size_t> support_;
};

struct MinimizeSpec {
  SimplexPoint start;
  SimplexPoint end;
  double horizon = 1.0;
  std::size_t knots = 64;  // number of intervals M
  std::size_t max_iters = 50000;
  double grad_tol = 1e-8;
  std::optional<FitnessMatrix> fitness;

  void validate(const ModelParams& params) const;
};

struct MinimizeResult {
  PathGrid path;
  double action;
  std::size_t iterations;
  double grad_norm;
  /// Objective after every accepted step, starting with the initial value.
  std::vector<double> history;
  std::string init;  // which initialization produced the result
};

/// Chart gradient of the discretized action at each interior knot
/// (knots 1..M-1), as produced by the minimizer's objective.
std::vector<std::vector<double>> action_gradient(const ModelParams& params, const std::optional<FitnessMatrix>& V,
                                                 const PathGrid& path);

/// Knots linear in the chart between start and end, uniform times.
PathGrid chart_linear_path(const ModelParams& params, const SimplexPoint& start, const SimplexPoint& end, double T,
                           std::size_t M);

/// Time-reversed deterministic flow ending at `end`, with the mismatch at
/// t = 0 removed by a linear correction. nullopt if the correction leaves the
/// open face of supp(p).
std::optional<PathGrid> reversed_flow_path(const ModelParams& params, const std::optional<FitnessMatrix>& V,
                                           const SimplexPoint& start, const SimplexPoint& end, double T,
                                           std::size_t M);

/// Piecewise-linear interpolation of `path` onto `times` (within its range).
PathGrid resample(const PathGrid& path, const std::vector<double>& times);

/// L-BFGS in the chart. Tries `init` (or the chart-linear path) and the
/// reversed flow path, returns the best. Throws ConvergenceError if no
/// attempt reaches 1e3 * grad_tol.
MinimizeResult minimize_action(const ModelParams& params, const MinimizeSpec& spec,
                               const std::optional<PathGrid>& init = std::nullopt);

struct QuasiPotentialRow {
  double horizon;
  std::size_t knots;
  double action;       // minimized action at this horizon
  double running_min;  // quasi-potential estimate so far
  std::size_t iterations;
};

struct QuasiPotentialOptions {
  std::vector<double> horizons = {1, 2, 5, 10, 20, 40};
  double knots_per_unit_time = 12.8;
  std::size_t min_knots = 64;
  std::size_t max_iters = 50000;
  double grad_tol = 1e-8;
};

/// Attractor of the deterministic flow started at p.
SimplexPoint flow_attractor(const ModelParams& params, const std::optional<FitnessMatrix>& V);

/// Minimal action from the attractor to `target` for every horizon. Each
/// horizon also tries the previous optimum preceded by a rest at the
/// attractor.
std::vector<QuasiPotentialRow> quasi_potential(const ModelParams& params, const std::optional<FitnessMatrix>& V,
                                               const SimplexPoint& target,
                                               const QuasiPotentialOptions& options = {});

}  // namespace wfldp
