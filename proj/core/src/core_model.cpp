#include "wfldp/core_model.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "wfldp/rng.hpp"

namespace wfldp {

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    std::ostringstream os;
    os << what << ": dimension mismatch (" << a << " vs " << b << ")";
    throw DimensionError(os.str());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// SimplexPoint

SimplexPoint::SimplexPoint(std::vector<double> weights) : w_(std::move(weights)) {
  if (w_.size() < 2) throw DomainError("SimplexPoint: need at least 2 types");
  double sum = 0.0;
  bool snapped = false;
  for (double& w : w_) {
    if (!std::isfinite(w)) throw DomainError("SimplexPoint: non-finite weight");
    if (w != 0.0 && std::abs(w) < kSnapTolerance) {
      w = 0.0;
      snapped = true;
    }
    if (w < 0.0) throw DomainError("SimplexPoint: negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "SimplexPoint: weights sum to " << sum << ", not 1";
    throw DomainError(os.str());
  }
  // A sum already at rounding level is left alone, so canonical points are
  // fixed points of this constructor.
  const double rounding = 2.0 * static_cast<double>(w_.size()) * std::numeric_limits<double>::epsilon();
  if (snapped || std::abs(sum - 1.0) > rounding) {
    for (double& w : w_) w /= sum;
  }
}

SimplexPoint SimplexPoint::uniform(std::size_t n) {
  return SimplexPoint(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

bool SimplexPoint::absolutely_continuous_wrt(const SimplexPoint& p) const {
  require_same_size(size(), p.size(), "absolutely_continuous_wrt");
  for (std::size_t i = 0; i < size(); ++i) {
    if (p.w_[i] == 0.0 && w_[i] != 0.0) return false;
  }
  return true;
}

bool SimplexPoint::strictly_positive() const noexcept {
  return std::all_of(w_.begin(), w_.end(), [](double w) { return w > 0.0; });
}

// ---------------------------------------------------------------------------
// ZeroSumVector

ZeroSumVector::ZeroSumVector(std::vector<double> components) : c_(std::move(components)) {
  double sum = 0.0, scale = 0.0;
  std::size_t nonzero = 0;
  for (double c : c_) {
    if (!std::isfinite(c)) throw DomainError("ZeroSumVector: non-finite component");
    sum += c;
    scale += std::abs(c);
    if (c != 0.0) ++nonzero;
  }
  // Rounding in the caller's drift formula leaves residues of order eps*scale.
  if (std::abs(sum) > 1e-9 * std::max(1.0, scale)) {
    std::ostringstream os;
    os.precision(17);
    os << "ZeroSumVector: components sum to " << sum;
    throw DomainError(os.str());
  }
  if (sum != 0.0 && nonzero > 0) {
    const double shift = sum / static_cast<double>(nonzero);
    for (double& c : c_) {
      if (c != 0.0) c -= shift;
    }
  }
}

// ---------------------------------------------------------------------------
// ModelParams

ModelParams::ModelParams(double theta, SimplexPoint p, double gamma)
    : theta_(theta), p_(std::move(p)), gamma_(gamma) {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw DomainError("ModelParams: theta must be > 0");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("ModelParams: gamma must be > 0");
}

// ---------------------------------------------------------------------------
// FitnessMatrix

FitnessMatrix::FitnessMatrix(std::size_t n, std::vector<double> row_major)
    : n_(n), v_(std::move(row_major)) {
  if (n_ == 0 || v_.size() != n_ * n_) throw DimensionError("FitnessMatrix: entries are not n x n");
  for (double v : v_) {
    if (!std::isfinite(v)) throw DomainError("FitnessMatrix: non-finite entry");
  }
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      if (v_[i * n_ + j] != v_[j * n_ + i]) throw DomainError("FitnessMatrix: not symmetric");
    }
  }
}

FitnessMatrix FitnessMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  std::vector<double> flat;
  flat.reserve(n * n);
  for (const auto& r : rows) {
    if (r.size() != n) throw DimensionError("FitnessMatrix: matrix is not square");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return FitnessMatrix(n, std::move(flat));
}

FitnessMatrix FitnessMatrix::constant(std::size_t n, double c) {
  return FitnessMatrix(n, std::vector<double>(n * n, c));
}

void FitnessMatrix::apply(std::span<const double> x, std::span<double> out) const {
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n_; ++j) s += v_[i * n_ + j] * x[j];
    out[i] = s;
  }
}

std::vector<double> FitnessMatrix::apply(std::span<const double> x) const {
  require_same_size(x.size(), n_, "FitnessMatrix::apply");
  std::vector<double> out(n_);
  apply(x, out);
  return out;
}

double FitnessMatrix::quadratic(std::span<const double> x) const {
  double q = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n_; ++j) s += v_[i * n_ + j] * x[j];
    q += x[i] * s;
  }
  return q;
}

// ---------------------------------------------------------------------------
// Rate ingredients

double relative_entropy(const SimplexPoint& p, const SimplexPoint& x) {
  require_same_size(p.size(), x.size(), "relative_entropy");
  double h = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (x[i] == 0.0) return kInfinity;
    h += p[i] * std::log(p[i] / x[i]);
  }
  // Cancellation can leave -1e-17 when p == x.
  return std::max(h, 0.0);
}

double equilibrium_rate(const ModelParams& params, const SimplexPoint& x) {
  require_same_size(params.size(), x.size(), "equilibrium_rate");
  if (!x.absolutely_continuous_wrt(params.p())) return kInfinity;
  return params.theta() * relative_entropy(params.p(), x);
}

ZeroSumVector mutation_drift(const ModelParams& params, const SimplexPoint& x) {
  require_same_size(params.size(), x.size(), "mutation_drift");
  std::vector<double> b(x.size());
  kernels::mutation_drift(params.theta(), params.p().weights(), x.weights(), b);
  return ZeroSumVector(std::move(b));
}

ZeroSumVector selection_drift(const FitnessMatrix& V, const SimplexPoint& x) {
  require_same_size(V.size(), x.size(), "selection_drift");
  std::vector<double> vx(x.size()), r(x.size());
  V.apply(x.weights(), vx);
  kernels::apply_covariance(x.weights(), vx, r);
  return ZeroSumVector(std::move(r));
}

double mean_fitness(const FitnessMatrix& V, const SimplexPoint& x) {
  require_same_size(V.size(), x.size(), "mean_fitness");
  return V.quadratic(x.weights());
}

std::vector<double> wf_covariance(const SimplexPoint& x) {
  const std::size_t n = x.size();
  std::vector<double> d(n * n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = 0; l < n; ++l) d[k * n + l] = x[k] * ((k == l ? 1.0 : 0.0) - x[l]);
  }
  return d;
}

double dual_norm_sq(const SimplexPoint& mu, const ZeroSumVector& direction) {
  require_same_size(mu.size(), direction.size(), "dual_norm_sq");
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double c = direction[i];
    if (c == 0.0) continue;
    if (mu[i] == 0.0) return kInfinity;
    s += c * c / mu[i];
  }
  return 0.5 * s;
}

// ---------------------------------------------------------------------------
// C(theta, p, V)

namespace {

// Objective restricted to the support S of p, written in terms of mu on S.
struct SupportObjective {
  const ModelParams& params;
  const FitnessMatrix& V;
  std::vector<std::size_t> support;

  SupportObjective(const ModelParams& prm, const FitnessMatrix& v) : params(prm), V(v) {
    for (std::size_t i = 0; i < prm.size(); ++i) {
      if (prm.p()[i] > 0.0) support.push_back(i);
    }
  }

  std::vector<double> embed(std::span<const double> mu_s) const {
    std::vector<double> mu(params.size(), 0.0);
    for (std::size_t k = 0; k < support.size(); ++k) mu[support[k]] = mu_s[k];
    return mu;
  }

  // V(mu) + theta sum p log mu - theta sum p log p  (= V(mu) - theta H(p|mu))
  double value(std::span<const double> mu_s) const {
    const auto mu = embed(mu_s);
    double h = 0.0;
    for (std::size_t k = 0; k < support.size(); ++k) {
      const double pk = params.p()[support[k]];
      if (mu_s[k] <= 0.0) return -kInfinity;
      h += pk * std::log(pk / mu_s[k]);
    }
    return V.quadratic(mu) - params.theta() * h;
  }

  // Gradient with respect to softmax logits z (mu = softmax(z)):
  //   2 mu_j ((V mu)_j - mu'V mu) + theta (p_j - mu_j)
  void logit_gradient(std::span<const double> mu_s, std::span<double> grad) const {
    const auto mu = embed(mu_s);
    std::vector<double> vmu(mu.size());
    V.apply(mu, vmu);
    const double m = V.quadratic(mu);
    for (std::size_t k = 0; k < support.size(); ++k) {
      const std::size_t i = support[k];
      grad[k] = 2.0 * mu_s[k] * (vmu[i] - m) + params.theta() * (params.p()[i] - mu_s[k]);
    }
  }
};

std::vector<double> softmax(std::span<const double> z) {
  const double zmax = *std::max_element(z.begin(), z.end());
  std::vector<double> mu(z.size());
  double s = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    mu[k] = std::exp(z[k] - zmax);
    s += mu[k];
  }
  for (double& m : mu) m /= s;
  return mu;
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

struct AscentOutcome {
  std::vector<double> mu;
  double value;
  double grad_norm;
  int iterations;
  bool converged;
};

AscentOutcome ascend(const SupportObjective& obj, std::vector<double> z, const ComputeCOptions& opt) {
  const std::size_t k = z.size();
  std::vector<double> mu = softmax(z), grad(k), trial(k);
  double f = obj.value(mu);
  obj.logit_gradient(mu, grad);
  double gn = norm2(grad);
  double step = 1.0;
  int it = 0;
  for (; it < opt.max_iterations && gn >= opt.grad_tol; ++it) {
    // Armijo backtracking on the ascent direction, then let the step grow.
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t j = 0; j < k; ++j) trial[j] = z[j] + step * grad[j];
      const auto mu_t = softmax(trial);
      const double f_t = obj.value(mu_t);
      if (f_t >= f + 1e-4 * step * gn * gn) {
        z = trial;
        mu = mu_t;
        f = f_t;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    obj.logit_gradient(mu, grad);
    gn = norm2(grad);
    step = std::min(step * 2.0, 1e3);
  }
  return {mu, f, gn, it, gn < opt.grad_tol};
}

}  // namespace

ComputeCResult compute_C(const ModelParams& params, const FitnessMatrix& V,
                         const ComputeCOptions& options) {
  require_same_size(params.size(), V.size(), "compute_C");
  SupportObjective obj(params, V);
  const std::size_t k = obj.support.size();
  if (k == 1) {
    return {obj.value(std::vector<double>{1.0}), params.p(), 0};
  }

  Xoshiro256pp rng = stream_engine(options.seed, 0);
  std::normal_distribution<double> normal(0.0, 1.0);

  bool have_best = false;
  AscentOutcome best{};
  AscentOutcome best_any{};
  best_any.value = -kInfinity;
  for (int r = 0; r < options.restarts; ++r) {
    std::vector<double> z(k);
    if (r == 0) {
      for (std::size_t j = 0; j < k; ++j) z[j] = std::log(params.p()[obj.support[j]]);
    } else {
      for (double& zj : z) zj = 2.0 * normal(rng);
    }
    auto out = ascend(obj, std::move(z), options);
    if (out.value > best_any.value) best_any = out;
    // First-found wins ties.
    if (out.converged && (!have_best || out.value > best.value)) {
      best = std::move(out);
      have_best = true;
    }
  }
  if (!have_best) {
    throw ConvergenceError("compute_C: no restart reached the gradient tolerance",
                           obj.embed(best_any.mu), best_any.value);
  }
  return {best.value, SimplexPoint(obj.embed(best.mu)), best.iterations};
}

ComputeCResult compute_C_grid(const ModelParams& params, const FitnessMatrix& V,
                              double resolution, double fine_resolution) {
  require_same_size(params.size(), V.size(), "compute_C_grid");
  SupportObjective obj(params, V);
  const std::size_t k = obj.support.size();
  if (k > 3) throw DimensionError("compute_C_grid: support larger than 3");
  if (k == 1) return {obj.value(std::vector<double>{1.0}), params.p(), 0};

  double best_val = -kInfinity;
  std::vector<double> best_mu;
  auto consider = [&](std::vector<double> mu) {
    const double v = obj.value(mu);
    if (v > best_val) {
      best_val = v;
      best_mu = std::move(mu);
    }
  };

  if (k == 2) {
    auto sweep = [&](double lo, double hi, double h) {
      const long steps = static_cast<long>(std::ceil((hi - lo) / h));
      for (long s = 0; s <= steps; ++s) {
        const double a = std::clamp(lo + static_cast<double>(s) * h, 0.0, 1.0);
        consider({a, 1.0 - a});
      }
    };
    sweep(0.0, 1.0, resolution);
    const double c = best_mu[0];
    sweep(std::max(0.0, c - resolution), std::min(1.0, c + resolution), fine_resolution);
  } else {
    auto sweep = [&](double lo1, double hi1, double lo2, double hi2, double h) {
      const long s1 = static_cast<long>(std::ceil((hi1 - lo1) / h));
      const long s2 = static_cast<long>(std::ceil((hi2 - lo2) / h));
      for (long i = 0; i <= s1; ++i) {
        const double a = std::clamp(lo1 + static_cast<double>(i) * h, 0.0, 1.0);
        for (long j = 0; j <= s2; ++j) {
          const double b = std::clamp(lo2 + static_cast<double>(j) * h, 0.0, 1.0);
          if (a + b > 1.0) break;
          consider({a, b, 1.0 - a - b});
        }
      }
    };
    sweep(0.0, 1.0, 0.0, 1.0, resolution);
    const double c1 = best_mu[0], c2 = best_mu[1];
    sweep(std::max(0.0, c1 - resolution), std::min(1.0, c1 + resolution),
          std::max(0.0, c2 - resolution), std::min(1.0, c2 + resolution), fine_resolution);
  }
  return {best_val, SimplexPoint(obj.embed(best_mu)), 0};
}

double selection_equilibrium_rate(const ModelParams& params, const FitnessMatrix& V,
                                  const SimplexPoint& x, const ComputeCResult& c) {
  require_same_size(params.size(), x.size(), "selection_equilibrium_rate");
  const double rate = equilibrium_rate(params, x);
  if (is_infinite(rate)) return kInfinity;
  return std::max(0.0, c.value - (mean_fitness(V, x) - rate));
}

double selection_equilibrium_rate(const ModelParams& params, const FitnessMatrix& V,
                                  const SimplexPoint& x) {
  return selection_equilibrium_rate(params, V, x, compute_C(params, V));
}

}  // namespace wfldp
