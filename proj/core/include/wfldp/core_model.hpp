#pragma once

// Finite-allele Wright-Fisher model: simplex geometry, parameters, drifts,
// entropies and the closed-form rate-function ingredients.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "wfldp/errors.hpp"

namespace wfldp {

/// Extended-real "+infinity". Rate functions return exactly this value (never
/// a large finite float) for infeasible arguments.
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

inline bool is_infinite(double v) noexcept { return v == kInfinity; }

/// Probability vector on n >= 2 types.
///
/// Construction canonicalizes: weights with magnitude below kSnapTolerance are
/// snapped to exactly zero and the vector is renormalized. The sum must be
/// within kSumTolerance of one before renormalization.
class SimplexPoint {
 public:
  static constexpr double kSnapTolerance = 1e-15;
  static constexpr double kSumTolerance = 1e-12;

  explicit SimplexPoint(std::vector<double> weights);

  static SimplexPoint uniform(std::size_t n);

  std::size_t size() const noexcept { return w_.size(); }
  double operator[](std::size_t i) const noexcept { return w_[i]; }
  std::span<const double> weights() const noexcept { return w_; }
  const std::vector<double>& vector() const noexcept { return w_; }

  /// x << p: every coordinate where p vanishes also vanishes here.
  bool absolutely_continuous_wrt(const SimplexPoint& p) const;
  bool strictly_positive() const noexcept;

  friend bool operator==(const SimplexPoint&, const SimplexPoint&) = default;

 private:
  std::vector<double> w_;
};

/// Tangent direction to the simplex. Construction removes any residual sum
/// (from rounding) by spreading it over the non-zero components, so exact
/// zeros stay exact zeros.
class ZeroSumVector {
 public:
  static constexpr double kSumTolerance = 1e-12;

  explicit ZeroSumVector(std::vector<double> components);

  static ZeroSumVector zeros(std::size_t n) { return ZeroSumVector(std::vector<double>(n, 0.0)); }

  std::size_t size() const noexcept { return c_.size(); }
  double operator[](std::size_t i) const noexcept { return c_[i]; }
  std::span<const double> components() const noexcept { return c_; }
  const std::vector<double>& vector() const noexcept { return c_; }

 private:
  std::vector<double> c_;
};

/// Parent-independent mutation intensity theta, mutation target p and
/// sampling rate gamma (= epsilon^2).
class ModelParams {
 public:
  ModelParams(double theta, SimplexPoint p, double gamma);

  double theta() const noexcept { return theta_; }
  const SimplexPoint& p() const noexcept { return p_; }
  double gamma() const noexcept { return gamma_; }
  double epsilon() const noexcept { return std::sqrt(gamma_); }
  std::size_t size() const noexcept { return p_.size(); }

  ModelParams with_gamma(double gamma) const { return ModelParams(theta_, p_, gamma); }

 private:
  double theta_;
  SimplexPoint p_;
  double gamma_;
};

/// Symmetric n x n fitness matrix V(i, j), stored row-major.
class FitnessMatrix {
 public:
  FitnessMatrix(std::size_t n, std::vector<double> row_major);
  /// Rows given as nested lists; must be square.
  static FitnessMatrix from_rows(const std::vector<std::vector<double>>& rows);
  static FitnessMatrix constant(std::size_t n, double c);
  static FitnessMatrix zeros(std::size_t n) { return constant(n, 0.0); }

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return v_[i * n_ + j]; }
  std::span<const double> entries() const noexcept { return v_; }

  /// (Vx)_i for a raw coordinate vector.
  void apply(std::span<const double> x, std::span<double> out) const;
  std::vector<double> apply(std::span<const double> x) const;
  /// x'Vx
  double quadratic(std::span<const double> x) const;

 private:
  std::size_t n_;
  std::vector<double> v_;
};

// ---------------------------------------------------------------------------
// Rate-function ingredients

/// H(p|x) = sum_{p_i > 0} p_i log(p_i / x_i); +inf when p_i > 0 = x_i.
double relative_entropy(const SimplexPoint& p, const SimplexPoint& x);

/// theta * H(p|x) if x << p, else +inf.
double equilibrium_rate(const ModelParams& params, const SimplexPoint& x);

/// b_i = (theta/2)(p_i - x_i) over all n coordinates.
ZeroSumVector mutation_drift(const ModelParams& params, const SimplexPoint& x);

/// r_i = x_i [(Vx)_i - x'Vx], the replicator drift; equals D(x) Vx.
ZeroSumVector selection_drift(const FitnessMatrix& V, const SimplexPoint& x);

/// V(x) = x'Vx
double mean_fitness(const FitnessMatrix& V, const SimplexPoint& x);

/// Wright-Fisher covariance D(x)_{kl} = x_k (delta_kl - x_l) as an n x n
/// row-major matrix.
std::vector<double> wf_covariance(const SimplexPoint& x);

/// 1/2 sum theta_i^2 / mu_i, with 0/0 = 0 and c/0 = +inf.
double dual_norm_sq(const SimplexPoint& mu, const ZeroSumVector& direction);

struct ComputeCOptions {
  int restarts = 16;
  int max_iterations = 10000;
  double grad_tol = 1e-9;
  std::uint64_t seed = 0x5eedc0ffee;
};

struct ComputeCResult {
  double value;
  SimplexPoint argmax;
  int iterations;  // of the winning restart
};

/// C = sup_mu [V(mu) - theta H(p|mu)] over the support of p, by multi-start
/// gradient ascent in softmax coordinates.
/// Throws ConvergenceError (carrying the best iterate) if no restart reaches
/// the gradient tolerance within the budget.
ComputeCResult compute_C(const ModelParams& params, const FitnessMatrix& V,
                         const ComputeCOptions& options = {});

/// Exhaustive grid search for C, n <= 3 only. A coarse sweep at
/// `resolution` followed by a local sweep at `fine_resolution` around the best
/// coarse cell. Intended as a test oracle for compute_C.
ComputeCResult compute_C_grid(const ModelParams& params, const FitnessMatrix& V,
                              double resolution = 1e-4, double fine_resolution = 1e-6);

/// C - [V(x) - theta H(p|x)].
double selection_equilibrium_rate(const ModelParams& params, const FitnessMatrix& V,
                                  const SimplexPoint& x, const ComputeCResult& c);
double selection_equilibrium_rate(const ModelParams& params, const FitnessMatrix& V,
                                  const SimplexPoint& x);

// ---------------------------------------------------------------------------
// Raw-coordinate kernels shared by the path and simulation modules. All take
// full n-vectors.
namespace kernels {

inline void mutation_drift(double theta, std::span<const double> p, std::span<const double> x,
                           std::span<double> out) noexcept {
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = 0.5 * theta * (p[i] - x[i]);
}

// out = D(x) g = x_i (g_i - x'g)
inline void apply_covariance(std::span<const double> x, std::span<const double> g,
                             std::span<double> out) noexcept {
  double xg = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) xg += x[i] * g[i];
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * (g[i] - xg);
}

// g'D(x)g = sum x_i (g_i - x'g)^2, never negative
inline double covariance_quadratic(std::span<const double> x, std::span<const double> g) noexcept {
  double xg = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) xg += x[i] * g[i];
  double q = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) q += x[i] * (g[i] - xg) * (g[i] - xg);
  return q;
}

}  // namespace kernels

}  // namespace wfldp
