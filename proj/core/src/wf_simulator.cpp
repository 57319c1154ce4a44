#include "wfldp/wf_simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "wfldp/rng.hpp"

namespace wfldp {

std::size_t SimConfig::steps() const {
  if (!(dt > 0.0) || !(t_end > 0.0) || dt > t_end) throw DomainError("SimConfig: need 0 < dt <= t_end");
  const double ratio = t_end / dt;
  if (ratio > 1e9) throw DomainError("SimConfig: t_end/dt exceeds 1e9");
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * rounded) throw DomainError("SimConfig: t_end is not a multiple of dt");
  if (record_stride < 1) throw DomainError("SimConfig: record_stride must be >= 1");
  const auto steps = static_cast<std::size_t>(rounded);
  if (steps % record_stride != 0) throw DomainError("SimConfig: step count not divisible by record_stride");
  if (!(boundary_floor >= 0.0) || boundary_floor >= 0.5) throw DomainError("SimConfig: boundary_floor out of range");
  return steps;
}

std::vector<double> recorded_times(const SimConfig& cfg) {
  const std::size_t steps = cfg.steps();
  const std::size_t knots = steps / cfg.record_stride;
  std::vector<double> t(knots + 1);
  for (std::size_t k = 0; k <= knots; ++k) {
    t[k] = k == knots ? cfg.t_end : static_cast<double>(k * cfg.record_stride) * cfg.dt;
  }
  return t;
}

namespace {

// In-place lower Cholesky of the leading (n-1) block of D(x), with column
// truncation at tiny pivots.
void cholesky_chart(std::span<const double> x, std::span<double> L) {
  const std::size_t d = x.size() - 1;
  std::fill(L.begin(), L.end(), 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    double diag = x[j] * (1.0 - x[j]);
    for (std::size_t k = 0; k < j; ++k) diag -= L[j * d + k] * L[j * d + k];
    if (diag < 1e-14) continue;  // rank truncation: column stays zero
    const double ljj = std::sqrt(diag);
    L[j * d + j] = ljj;
    for (std::size_t i = j + 1; i < d; ++i) {
      double s = -x[i] * x[j];
      for (std::size_t k = 0; k < j; ++k) s -= L[i * d + k] * L[j * d + k];
      L[i * d + j] = s / ljj;
    }
  }
}

void check_law(const ModelParams& params, const SimulationLaw& law, std::size_t steps) {
  const std::size_t n = params.size();
  if (law.fitness && law.fitness->size() != n) throw DimensionError("simulate: fitness dimension mismatch");
  if (law.target_fitness && law.target_fitness->size() != n)
    throw DimensionError("simulate: target fitness dimension mismatch");
  if (law.control && law.control->size() != steps * n)
    throw DimensionError("simulate: control must hold one n-vector per Euler step");
}

}  // namespace

CholeskyFactor factor_covariance(const SimplexPoint& x) {
  CholeskyFactor f{x.size() - 1, std::vector<double>((x.size() - 1) * (x.size() - 1))};
  cholesky_chart(x.weights(), f.lower);
  return f;
}

Trajectory simulate(const ModelParams& params, const std::optional<FitnessMatrix>& V,
                    const SimConfig& cfg, const SimplexPoint& start, std::uint64_t stream) {
  SimulationLaw law;
  law.fitness = V;
  return simulate(params, law, cfg, start, stream);
}

Trajectory simulate(const ModelParams& params, const SimulationLaw& law, const SimConfig& cfg,
                    const SimplexPoint& start, std::uint64_t stream) {
  const std::size_t steps = cfg.steps();
  const std::size_t n = params.size();
  if (start.size() != n) throw DimensionError("simulate: start dimension differs from model");
  check_law(params, law, steps);

  const std::size_t d = n - 1;
  const auto p = params.p().weights();
  const double theta = params.theta();
  const double dt = cfg.dt;
  const double noise_scale = cfg.zero_noise ? 0.0 : params.epsilon() * std::sqrt(dt);
  const double inv_gamma = 1.0 / params.gamma();

  Xoshiro256pp rng = stream_engine(cfg.seed, stream);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<double> x(start.weights().begin(), start.weights().end());
  std::vector<double> y(n), drift(n), eta(n), tilt(n), delta(n), xi(d), L(d * d), tmp(n);

  const std::size_t knots = steps / cfg.record_stride;
  std::vector<double> rec;
  rec.reserve((knots + 1) * n);
  rec.insert(rec.end(), x.begin(), x.end());

  double log_w = 0.0;
  for (std::size_t s = 0; s < steps; ++s) {
    // eta = V_sim x + h_s ; drift = b + D(x) eta
    std::fill(eta.begin(), eta.end(), 0.0);
    if (law.fitness) law.fitness->apply(x, eta);
    if (law.control) {
      const double* h = law.control->data() + s * n;
      for (std::size_t i = 0; i < n; ++i) eta[i] += h[i];
    }
    kernels::mutation_drift(theta, p, x, drift);
    if (law.fitness || law.control) {
      kernels::apply_covariance(x, eta, tmp);
      for (std::size_t i = 0; i < n; ++i) drift[i] += tmp[i];
    }

    double chart_sum = 0.0;
    if (noise_scale > 0.0) {
      cholesky_chart(x, L);
      for (double& v : xi) v = normal(rng);
    }
    for (std::size_t k = 0; k < d; ++k) {
      double noise = 0.0;
      if (noise_scale > 0.0) {
        for (std::size_t l = 0; l <= k; ++l) noise += L[k * d + l] * xi[l];
      }
      y[k] = x[k] + drift[k] * dt + noise_scale * noise;
      chart_sum += y[k];
    }
    y[d] = 1.0 - chart_sum;

    // Simplex projection: clamp to the floor on supp(p), zero elsewhere, renormalize.
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(y[i])) {
        std::ostringstream os;
        os << "simulate: non-finite state at step " << s;
        throw NumericalError(os.str());
      }
      if (p[i] > 0.0) {
        y[i] = std::max(y[i], cfg.boundary_floor);
      } else if (y[i] < 0.0 || std::abs(y[i]) < SimplexPoint::kSnapTolerance) {
        y[i] = 0.0;
      }
      total += y[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      y[i] /= total;
      if (y[i] < SimplexPoint::kSnapTolerance) y[i] = 0.0;
    }

    if (law.track_weight) {
      // delta = eta_target - eta_sim ; dM = dx - (b + D eta_sim) dt
      std::fill(tilt.begin(), tilt.end(), 0.0);
      if (law.target_fitness) law.target_fitness->apply(x, tilt);
      double pair = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        delta[i] = tilt[i] - eta[i];
        pair += delta[i] * ((y[i] - x[i]) - drift[i] * dt);
      }
      log_w += inv_gamma * (pair - 0.5 * kernels::covariance_quadratic(x, delta) * dt);
    }

    x.swap(y);
    if ((s + 1) % cfg.record_stride == 0) rec.insert(rec.end(), x.begin(), x.end());
  }

  Trajectory out{PathGrid(recorded_times(cfg), n, std::move(rec)), std::nullopt, cfg.seed, stream, cfg, params};
  if (law.track_weight) out.girsanov_log_weight = log_w;
  return out;
}

double girsanov_log_weight(const ModelParams& params, const FitnessMatrix& V, const Trajectory& traj) {
  const auto& g = traj.grid;
  const std::size_t n = params.size();
  if (g.dimension() != n || V.size() != n) throw DimensionError("girsanov_log_weight: dimension mismatch");
  if (traj.params.theta() != params.theta() || traj.params.gamma() != params.gamma() ||
      !(traj.params.p() == params.p())) {
    throw DomainError("girsanov_log_weight: trajectory was simulated with different parameters");
  }
  const auto expected = recorded_times(traj.config);
  if (expected.size() != g.knot_count()) throw DomainError("girsanov_log_weight: grid does not match config");

  const auto p = params.p().weights();
  std::vector<double> vx(n), b(n);
  double G = 0.0;
  for (std::size_t k = 0; k < g.intervals(); ++k) {
    auto x = g.knot(k);
    auto y = g.knot(k + 1);
    const double h = g.time(k + 1) - g.time(k);
    V.apply(x, vx);
    kernels::mutation_drift(params.theta(), p, x, b);
    double pair = 0.0;
    for (std::size_t i = 0; i < n; ++i) pair += vx[i] * ((y[i] - x[i]) - b[i] * h);
    G += pair - 0.5 * kernels::covariance_quadratic(x, vx) * h;
  }
  return G / params.gamma();
}

PathGrid deterministic_flow(const ModelParams& params, const std::optional<FitnessMatrix>& V,
                            const SimplexPoint& start, const std::vector<double>& times,
                            std::size_t substeps) {
  const std::size_t n = params.size();
  if (start.size() != n) throw DimensionError("deterministic_flow: start dimension differs from model");
  if (V && V->size() != n) throw DimensionError("deterministic_flow: fitness dimension mismatch");
  const auto p = params.p().weights();
  auto rhs = [&](std::span<const double> x, std::span<double> out) {
    kernels::mutation_drift(params.theta(), p, x, out);
    if (V) {
      std::vector<double> vx(n), r(n);
      V->apply(x, vx);
      kernels::apply_covariance(x, vx, r);
      for (std::size_t i = 0; i < n; ++i) out[i] += r[i];
    }
  };
  std::vector<double> x(start.weights().begin(), start.weights().end());
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  std::vector<double> rec(x);
  rec.reserve(times.size() * n);
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double h = (times[k] - times[k - 1]) / static_cast<double>(substeps);
    for (std::size_t s = 0; s < substeps; ++s) {
      rhs(x, k1);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
      rhs(tmp, k2);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
      rhs(tmp, k3);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
      rhs(tmp, k4);
      for (std::size_t i = 0; i < n; ++i) x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    // The vector field is tangent to the simplex; remove rounding drift.
    double sum = 0.0;
    for (double v : x) sum += v;
    for (double& v : x) v /= sum;
    rec.insert(rec.end(), x.begin(), x.end());
  }
  return PathGrid(times, n, std::move(rec));
}

}  // namespace wfldp
