#include "wfldp/path_action.hpp"

#include <algorithm>

namespace wfldp {

namespace {

void check_dims(const ModelParams& params, const PathGrid& path, const FitnessMatrix* V) {
  if (path.dimension() != params.size()) throw DimensionError("path dimension differs from model");
  if (V && V->size() != params.size()) throw DimensionError("fitness dimension differs from model");
}

// Feasibility of interval k (knots k, k+1 and their midpoint).
bool interval_feasible(std::span<const double> p, std::span<const double> a, std::span<const double> b) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) {
      if (a[i] <= 0.0 || b[i] <= 0.0 || 0.5 * (a[i] + b[i]) <= 0.0) return false;
    } else if (a[i] != b[i]) {
      return false;
    }
  }
  return true;
}

// Workspace for one interval's midpoint quantities.
struct IntervalTerms {
  std::vector<double> mid, vel, drift, vm, w;
  explicit IntervalTerms(std::size_t n) : mid(n), vel(n), drift(n), vm(n), w(n) {}

  // Fills mid, vel, drift (b + r) and vm (= V mid, or zeros).
  void evaluate(double theta, std::span<const double> p, const FitnessMatrix* V, double dt,
                std::span<const double> a, std::span<const double> b) {
    const std::size_t n = p.size();
    for (std::size_t i = 0; i < n; ++i) {
      mid[i] = 0.5 * (a[i] + b[i]);
      vel[i] = (b[i] - a[i]) / dt;
    }
    kernels::mutation_drift(theta, p, mid, drift);
    if (V) {
      V->apply(mid, vm);
      double m = 0.0;
      for (std::size_t i = 0; i < n; ++i) m += mid[i] * vm[i];
      for (std::size_t i = 0; i < n; ++i) drift[i] += mid[i] * (vm[i] - m);
    } else {
      std::fill(vm.begin(), vm.end(), 0.0);
    }
    for (std::size_t i = 0; i < n; ++i) w[i] = vel[i] - drift[i];
  }

  // 1/2 sum w_i^2 / mid_i   (terms with mid_i = 0 have w_i = 0 on feasible paths)
  double lagrangian() const {
    double s = 0.0;
    for (std::size_t i = 0; i < mid.size(); ++i) {
      if (mid[i] > 0.0) s += w[i] * w[i] / mid[i];
    }
    return 0.5 * s;
  }
};

}  // namespace

namespace detail {

double midpoint_action(double theta, std::span<const double> p, const FitnessMatrix* V,
                       std::span<const double> times, std::size_t n, std::span<const double> knots,
                       std::span<double> grad) {
  const std::size_t M = times.size() - 1;
  const bool want_grad = !grad.empty();
  if (want_grad) std::fill(grad.begin(), grad.end(), 0.0);
  IntervalTerms t(n);
  std::vector<double> dm(n), du(n), vw(n);
  double total = 0.0;
  for (std::size_t k = 0; k < M; ++k) {
    auto a = knots.subspan(k * n, n);
    auto b = knots.subspan((k + 1) * n, n);
    if (!interval_feasible(p, a, b)) return kInfinity;
    const double dt = times[k + 1] - times[k];
    t.evaluate(theta, p, V, dt, a, b);
    total += dt * t.lagrangian();
    if (!want_grad) continue;

    // L = 1/2 dt sum w_i^2/m_i,  w = u - d(m)
    //   dL/du_i = dt w_i/m_i
    //   dL/dm_i = -dt sum_j (w_j/m_j) dd_j/dm_i - 1/2 dt w_i^2/m_i^2
    double m_vm = 0.0, sum_w = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      m_vm += t.mid[i] * t.vm[i];
      sum_w += t.w[i];
    }
    if (V) V->apply(t.w, vw);
    for (std::size_t i = 0; i < n; ++i) {
      if (!(t.mid[i] > 0.0)) {
        du[i] = 0.0;
        dm[i] = 0.0;
        continue;
      }
      const double q = t.w[i] / t.mid[i];
      du[i] = dt * q;
      // sum_j q_j dd_j/dm_i, with dd_j/dm_i = delta_ij (-theta/2 + (Vm)_j - m'Vm) + m_j (V_ji - 2 (Vm)_i)
      double jac = q * (-0.5 * theta);
      if (V) jac += q * (t.vm[i] - m_vm) + vw[i] - 2.0 * t.vm[i] * sum_w;
      dm[i] = -dt * jac - 0.5 * dt * q * q;
    }
    for (std::size_t i = 0; i < n; ++i) {
      grad[k * n + i] += -du[i] / dt + 0.5 * dm[i];
      grad[(k + 1) * n + i] += du[i] / dt + 0.5 * dm[i];
    }
  }
  return total;
}

}  // namespace detail

double action_neutral(const ModelParams& params, const PathGrid& path) {
  check_dims(params, path, nullptr);
  return detail::midpoint_action(params.theta(), params.p().weights(), nullptr, path.times(),
                                 path.dimension(), path.data());
}

double action_selective(const ModelParams& params, const FitnessMatrix& V, const PathGrid& path) {
  check_dims(params, path, &V);
  return detail::midpoint_action(params.theta(), params.p().weights(), &V, path.times(),
                                 path.dimension(), path.data());
}

double gamma_V(const ModelParams& params, const FitnessMatrix& V, const PathGrid& path) {
  check_dims(params, path, &V);
  const std::size_t n = path.dimension();
  IntervalTerms t(n);
  double total = 0.0;
  for (std::size_t k = 0; k < path.intervals(); ++k) {
    const double dt = path.time(k + 1) - path.time(k);
    // Neutral drift only: evaluate without V, then apply V to the midpoint.
    t.evaluate(params.theta(), params.p().weights(), nullptr, dt, path.knot(k), path.knot(k + 1));
    V.apply(t.mid, t.vm);
    double pairing = 0.0;
    for (std::size_t i = 0; i < n; ++i) pairing += t.w[i] * t.vm[i];
    total += dt * (pairing - 0.5 * kernels::covariance_quadratic(t.mid, t.vm));
  }
  return total;
}

double gamma_V_boundary_form(const ModelParams& params, const FitnessMatrix& V, const PathGrid& path) {
  check_dims(params, path, &V);
  const std::size_t n = path.dimension();
  IntervalTerms t(n);
  double integral = 0.0;
  for (std::size_t k = 0; k < path.intervals(); ++k) {
    const double dt = path.time(k + 1) - path.time(k);
    t.evaluate(params.theta(), params.p().weights(), nullptr, dt, path.knot(k), path.knot(k + 1));
    V.apply(t.mid, t.vm);
    double bv = 0.0;
    for (std::size_t i = 0; i < n; ++i) bv += t.drift[i] * t.vm[i];
    integral += dt * (bv + 0.5 * kernels::covariance_quadratic(t.mid, t.vm));
  }
  const double end_term = V.quadratic(path.knot(path.intervals())) - V.quadratic(path.knot(0));
  return 0.5 * end_term - integral;
}

std::vector<ProfilePoint> boundary_blowup_profile(const ModelParams& params, const PathGrid& path) {
  check_dims(params, path, nullptr);
  const std::size_t n = path.dimension();
  const auto p = params.p().weights();
  std::vector<ProfilePoint> out;
  out.reserve(path.knot_count());
  out.push_back({path.time(0), 0.0});
  IntervalTerms t(n);
  double total = 0.0;
  for (std::size_t k = 0; k < path.intervals(); ++k) {
    if (!is_infinite(total)) {
      if (!interval_feasible(p, path.knot(k), path.knot(k + 1))) {
        total = kInfinity;
      } else {
        const double dt = path.time(k + 1) - path.time(k);
        t.evaluate(params.theta(), p, nullptr, dt, path.knot(k), path.knot(k + 1));
        total += dt * t.lagrangian();
      }
    }
    out.push_back({path.time(k + 1), total});
  }
  return out;
}

}  // namespace wfldp
