#pragma once

// Stationary laws of the finite-allele model: Wright's Dirichlet(theta p / gamma)
// law and its selection tilt  Z^-1 exp(V(x)/gamma) Dirichlet(dx).

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wfldp/core_model.hpp"

namespace wfldp {

/// Per-coordinate closed box prod [a_i, b_i] intersected with the simplex.
class EventBox {
 public:
  EventBox(std::vector<double> lower, std::vector<double> upper);
  static EventBox whole(std::size_t n);

  std::size_t size() const noexcept { return lo_.size(); }
  double lower(std::size_t i) const noexcept { return lo_[i]; }
  double upper(std::size_t i) const noexcept { return hi_[i]; }
  bool contains(const SimplexPoint& x) const;

 private:
  std::vector<double> lo_, hi_;
};

struct SampleBatch {
  std::vector<SimplexPoint> points;
  /// Importance weights; 1 for plain draws.
  std::vector<double> weights;
  std::uint64_t seed;
  ModelParams params;
  double ess;
  std::optional<std::string> warning;
};

/// count draws from Dirichlet(theta p_1/gamma, ..., theta p_n/gamma); exact
/// zeros where p vanishes. Draw i uses random stream i of `seed`.
SampleBatch dirichlet_sample(const ModelParams& params, std::size_t count, std::uint64_t seed);

/// Log density w.r.t. dx_1...dx_{n-1}. Requires p > 0 componentwise.
double dirichlet_log_density(const ModelParams& params, const SimplexPoint& x);

/// Pi(box) (or the V-tilted law's probability of box), n <= 3.
double exact_event_prob(const ModelParams& params, const EventBox& box,
                        const std::optional<FitnessMatrix>& V = std::nullopt);
/// log of exact_event_prob, accurate far into the tails.
double exact_event_log_prob(const ModelParams& params, const EventBox& box,
                            const std::optional<FitnessMatrix>& V = std::nullopt);

/// E[g] under the stationary (optionally tilted) law for n = 2, where g is a
/// function of x_1. Quadrature oracle for sampling tests.
double exact_expectation_n2(const ModelParams& params, const std::optional<FitnessMatrix>& V,
                            const std::function<double(double)>& g);

/// Dirichlet proposals, self-normalized weights proportional to exp(V(x)/gamma).
/// Attaches a warning (not an error) when ESS < 0.01 count.
SampleBatch tilted_sample(const ModelParams& params, const FitnessMatrix& V, std::size_t count,
                          std::uint64_t seed);

enum class ScanMode { Exact, MonteCarlo };

struct ScanRow {
  double gamma;
  double scaled_log_prob;  // gamma * log Pi(box); upper-bound based when zero_hit
  double ci_low = 0.0;     // MC only, on the gamma*log scale
  double ci_high = 0.0;
  bool zero_hit = false;
  std::size_t samples = 0;
  double hits = 0.0;  // weighted for tilted MC
  std::uint64_t seed = 0;
};

struct ScanOptions {
  ScanMode mode = ScanMode::Exact;
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
};

/// One row per gamma (strictly decreasing); template's gamma is ignored.
std::vector<ScanRow> ldp_scan(const ModelParams& params_template, const EventBox& box,
                              const std::vector<double>& gammas,
                              const std::optional<FitnessMatrix>& V, const ScanOptions& options);

/// Least-squares fit y = a + b gamma log(1/gamma) + c gamma; returns a.
double richardson_limit(const std::vector<ScanRow>& rows);

struct BoxRateInfimum {
  double closure;
  double interior;
};

/// inf over the box of the equilibrium rate (or of the selection rate when V
/// is given), by grid search on the closure and on the strict interior.
/// n <= 3. `c` is reused when supplied.
BoxRateInfimum box_rate_infimum(const ModelParams& params, const EventBox& box,
                                const std::optional<FitnessMatrix>& V, double resolution = 1e-4,
                                const std::optional<ComputeCResult>& c = std::nullopt);

struct WilsonInterval {
  double low, high;
};
/// Wilson score interval for `hits` successes out of `n` (hits may be an
/// effective, non-integer count).
WilsonInterval wilson_interval(double hits, double n, double z = 1.959963984540054);

}  // namespace wfldp
