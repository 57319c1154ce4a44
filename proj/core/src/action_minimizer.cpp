#include "wfldp/action_minimizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "wfldp/parallel.hpp"
#include "wfldp/path_action.hpp"
#include "wfldp/wf_simulator.hpp"

namespace wfldp {

// ---------------------------------------------------------------------------
// KnotChart

KnotChart::KnotChart(const SimplexPoint& p) : n_(p.size()) {
  for (std::size_t i = 0; i < n_; ++i) {
    if (p[i] > 0.0) support_.push_back(i);
  }
}

void KnotChart::encode(std::span<const double> x, std::span<double> z) const {
  const double last = std::log(x[support_.back()]);
  for (std::size_t j = 0; j + 1 < support_.size(); ++j) z[j] = std::log(x[support_[j]]) - last;
}

void KnotChart::decode(std::span<const double> z, std::span<double> x) const {
  std::fill(x.begin(), x.end(), 0.0);
  double m = 0.0;  // the last support coordinate has z = 0
  for (std::size_t j = 0; j + 1 < support_.size(); ++j) m = std::max(m, z[j]);
  double s = 0.0;
  for (std::size_t j = 0; j < support_.size(); ++j) {
    const double zj = j + 1 < support_.size() ? z[j] : 0.0;
    x[support_[j]] = std::exp(zj - m);
    s += x[support_[j]];
  }
  for (std::size_t k : support_) x[k] /= s;
}

void KnotChart::pullback(std::span<const double> x, std::span<const double> gx, std::span<double> gz) const {
  // dx_k/dz_j = x_k (delta_kj - x_j) on the support
  double xg = 0.0;
  for (std::size_t k : support_) xg += x[k] * gx[k];
  for (std::size_t j = 0; j + 1 < support_.size(); ++j) {
    const std::size_t k = support_[j];
    gz[j] = x[k] * (gx[k] - xg);
  }
}

// ---------------------------------------------------------------------------

namespace {

void require_interior(const SimplexPoint& p, std::span<const double> x, const char* what) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0 ? !(x[i] > 0.0) : x[i] != 0.0) {
      throw DomainError(std::string(what) + ": must be strictly positive on supp(p) and zero elsewhere");
    }
  }
}

std::vector<double> uniform_times(double T, std::size_t M) {
  std::vector<double> t(M + 1);
  for (std::size_t k = 0; k <= M; ++k) t[k] = k == M ? T : T * static_cast<double>(k) / static_cast<double>(M);
  return t;
}

// Action as a function of the chart coordinates of the interior knots.
class ChartObjective {
 public:
  ChartObjective(const ModelParams& params, const FitnessMatrix* V, std::vector<double> times,
                 std::vector<double> knots)
      : theta_(params.theta()),
        p_(params.p().weights().begin(), params.p().weights().end()),
        V_(V),
        chart_(params.p()),
        times_(std::move(times)),
        knots_(std::move(knots)),
        n_(params.size()),
        M_(times_.size() - 1),
        full_grad_(knots_.size()) {}

  std::size_t size() const noexcept { return (M_ - 1) * chart_.chart_dim(); }
  const std::vector<double>& knots() const noexcept { return knots_; }

  std::vector<double> encode_interior() const {
    const std::size_t d = chart_.chart_dim();
    std::vector<double> z(size());
    for (std::size_t k = 1; k < M_; ++k) {
      chart_.encode(std::span(knots_).subspan(k * n_, n_), std::span(z).subspan((k - 1) * d, d));
    }
    return z;
  }

  double operator()(const std::vector<double>& z, std::vector<double>& g) {
    const std::size_t d = chart_.chart_dim();
    for (std::size_t k = 1; k < M_; ++k) {
      chart_.decode(std::span(z).subspan((k - 1) * d, d), std::span(knots_).subspan(k * n_, n_));
    }
    const double f = detail::midpoint_action(theta_, p_, V_, times_, n_, knots_, full_grad_);
    if (is_infinite(f)) return f;
    g.resize(size());
    for (std::size_t k = 1; k < M_; ++k) {
      chart_.pullback(std::span(knots_).subspan(k * n_, n_), std::span(full_grad_).subspan(k * n_, n_),
                      std::span(g).subspan((k - 1) * d, d));
    }
    return f;
  }

 private:
  double theta_;
  std::vector<double> p_;
  const FitnessMatrix* V_;
  KnotChart chart_;
  std::vector<double> times_;
  std::vector<double> knots_;
  std::size_t n_, M_;
  std::vector<double> full_grad_;
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

struct LbfgsOutcome {
  std::vector<double> z;
  double f;
  double grad_norm;
  std::size_t iterations;
  std::vector<double> history;
};

LbfgsOutcome lbfgs(ChartObjective& obj, std::vector<double> z, std::size_t max_iters, double tol) {
  constexpr std::size_t kMemory = 8;
  constexpr double kArmijo = 1e-4;
  std::vector<double> g, g_new, dir(z.size()), z_new(z.size());
  double f = obj(z, g);
  if (is_infinite(f)) throw NumericalError("minimize_action: initial path has infinite action");
  LbfgsOutcome out{z, f, std::sqrt(dot(g, g)), 0, {f}};
  std::deque<std::vector<double>> S, Y;
  std::deque<double> RHO;
  std::vector<double> alpha(kMemory);

  std::size_t it = 0, stalled = 0;
  while (it < max_iters) {
    const double gn = std::sqrt(dot(g, g));
    if (gn <= tol) break;

    // Two-loop recursion.
    dir = g;
    for (std::size_t m = S.size(); m-- > 0;) {
      alpha[m] = RHO[m] * dot(S[m], dir);
      for (std::size_t i = 0; i < dir.size(); ++i) dir[i] -= alpha[m] * Y[m][i];
    }
    if (!S.empty()) {
      const double scale = dot(S.back(), Y.back()) / dot(Y.back(), Y.back());
      for (double& v : dir) v *= scale;
    }
    for (std::size_t m = 0; m < S.size(); ++m) {
      const double beta = RHO[m] * dot(Y[m], dir);
      for (std::size_t i = 0; i < dir.size(); ++i) dir[i] += (alpha[m] - beta) * S[m][i];
    }
    for (double& v : dir) v = -v;
    double slope = dot(g, dir);
    if (!(slope < 0.0)) {
      S.clear();
      Y.clear();
      RHO.clear();
      for (std::size_t i = 0; i < dir.size(); ++i) dir[i] = -g[i];
      slope = -gn * gn;
    }

    double step = S.empty() ? std::min(1.0, 1.0 / gn) : 1.0;
    bool accepted = false;
    double f_new = f;
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t i = 0; i < z.size(); ++i) z_new[i] = z[i] + step * dir[i];
      f_new = obj(z_new, g_new);
      if (std::isfinite(f_new) && f_new <= f + kArmijo * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (S.empty()) break;  // no progress possible along steepest descent
      S.clear();
      Y.clear();
      RHO.clear();
      continue;
    }
    ++it;
    std::vector<double> s(z.size()), y(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
      s[i] = z_new[i] - z[i];
      y[i] = g_new[i] - g[i];
    }
    const double sy = dot(s, y);
    if (sy > 1e-12 * std::sqrt(dot(s, s) * dot(y, y))) {
      if (S.size() == kMemory) {
        S.pop_front();
        Y.pop_front();
        RHO.pop_front();
      }
      S.push_back(std::move(s));
      Y.push_back(std::move(y));
      RHO.push_back(1.0 / sy);
    }
    // Decreases at the rounding level of f carry no information; stop after
    // a run of them instead of burning the budget.
    stalled = f - f_new <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(f) ? stalled + 1 : 0;
    z.swap(z_new);
    g.swap(g_new);
    f = f_new;
    out.history.push_back(f);
    if (stalled >= 10) break;
  }
  out.z = z;
  out.f = f;
  out.grad_norm = std::sqrt(dot(g, g));
  out.iterations = it;
  // leave the objective's knots at the returned iterate
  obj(out.z, g);
  return out;
}

std::vector<double> path_knots_with_ends(const PathGrid& init, const MinimizeSpec& spec) {
  std::vector<double> knots = init.data();
  const std::size_t n = init.dimension();
  const std::size_t M = init.intervals();
  std::copy(spec.start.weights().begin(), spec.start.weights().end(), knots.begin());
  std::copy(spec.end.weights().begin(), spec.end.weights().end(), knots.begin() + static_cast<long>(M * n));
  return knots;
}

MinimizeResult run_from(const ModelParams& params, const MinimizeSpec& spec, const PathGrid& init,
                        const std::string& label) {
  const FitnessMatrix* V = spec.fitness ? &*spec.fitness : nullptr;
  ChartObjective obj(params, V, init.times(), path_knots_with_ends(init, spec));
  if (obj.size() == 0) {
    std::vector<double> g;
    const double f = obj({}, g);
    return {PathGrid(init.times(), init.dimension(), obj.knots()), f, 0, 0.0, {f}, label};
  }
  const LbfgsOutcome o = lbfgs(obj, obj.encode_interior(), spec.max_iters, spec.grad_tol);
  PathGrid path(init.times(), init.dimension(), obj.knots());
  if (o.grad_norm > 1e3 * spec.grad_tol) {
    throw ConvergenceError("minimize_action: stopped after " + std::to_string(o.iterations) +
                               " iterations with gradient norm " + format_double(o.grad_norm) + " (" + label +
                               " init)",
                           path.data(), o.f);
  }
  return {std::move(path), o.f, o.iterations, o.grad_norm, o.history, label};
}

}  // namespace

// ---------------------------------------------------------------------------

void MinimizeSpec::validate(const ModelParams& params) const {
  const std::size_t n = params.size();
  if (start.size() != n || end.size() != n) throw DimensionError("MinimizeSpec: endpoint dimension mismatch");
  if (fitness && fitness->size() != n) throw DimensionError("MinimizeSpec: fitness dimension mismatch");
  require_interior(params.p(), start.weights(), "MinimizeSpec.start");
  require_interior(params.p(), end.weights(), "MinimizeSpec.end");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("MinimizeSpec: horizon must be positive");
  if (knots < 4) throw DomainError("MinimizeSpec: need M >= 4 intervals");
  if (max_iters == 0) throw DomainError("MinimizeSpec: max_iters must be >= 1");
  if (!(grad_tol > 0.0)) throw DomainError("MinimizeSpec: grad_tol must be positive");
}

std::vector<std::vector<double>> action_gradient(const ModelParams& params, const std::optional<FitnessMatrix>& V,
                                                 const PathGrid& path) {
  const std::size_t n = params.size();
  if (path.dimension() != n) throw DimensionError("action_gradient: path dimension differs from model");
  if (V && V->size() != n) throw DimensionError("action_gradient: fitness dimension mismatch");
  for (std::size_t k = 0; k < path.knot_count(); ++k) {
    require_interior(params.p(), path.knot(k), "action_gradient: path knot");
  }
  std::vector<double> full(path.data().size());
  const double f = detail::midpoint_action(params.theta(), params.p().weights(), V ? &*V : nullptr, path.times(),
                                           n, path.data(), full);
  if (is_infinite(f)) throw DomainError("action_gradient: path has infinite action");
  const KnotChart chart(params.p());
  std::vector<std::vector<double>> out;
  for (std::size_t k = 1; k < path.intervals(); ++k) {
    std::vector<double> gz(chart.chart_dim());
    chart.pullback(path.knot(k), std::span(full).subspan(k * n, n), gz);
    out.push_back(std::move(gz));
  }
  return out;
}

PathGrid chart_linear_path(const ModelParams& params, const SimplexPoint& start, const SimplexPoint& end, double T,
                           std::size_t M) {
  const KnotChart chart(params.p());
  const std::size_t n = params.size(), d = chart.chart_dim();
  require_interior(params.p(), start.weights(), "chart_linear_path: start");
  require_interior(params.p(), end.weights(), "chart_linear_path: end");
  std::vector<double> za(d), zb(d), z(d);
  chart.encode(start.weights(), za);
  chart.encode(end.weights(), zb);
  const auto times = uniform_times(T, M);
  std::vector<double> knots((M + 1) * n);
  for (std::size_t k = 0; k <= M; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(M);
    for (std::size_t j = 0; j < d; ++j) z[j] = (1.0 - s) * za[j] + s * zb[j];
    chart.decode(z, std::span(knots).subspan(k * n, n));
  }
  std::copy(start.weights().begin(), start.weights().end(), knots.begin());
  std::copy(end.weights().begin(), end.weights().end(), knots.begin() + static_cast<long>(M * n));
  return PathGrid(times, n, std::move(knots));
}

std::optional<PathGrid> reversed_flow_path(const ModelParams& params, const std::optional<FitnessMatrix>& V,
                                           const SimplexPoint& start, const SimplexPoint& end, double T,
                                           std::size_t M) {
  const std::size_t n = params.size();
  const auto times = uniform_times(T, M);
  const PathGrid fwd = deterministic_flow(params, V, end, times);
  std::vector<double> knots((M + 1) * n);
  auto phi0 = fwd.knot(M);
  for (std::size_t k = 0; k <= M; ++k) {
    const double w = 1.0 - times[k] / T;
    auto src = fwd.knot(M - k);
    for (std::size_t i = 0; i < n; ++i) knots[k * n + i] = src[i] + w * (start[i] - phi0[i]);
  }
  std::copy(start.weights().begin(), start.weights().end(), knots.begin());
  std::copy(end.weights().begin(), end.weights().end(), knots.begin() + static_cast<long>(M * n));
  for (std::size_t k = 0; k <= M; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const double v = knots[k * n + i];
      if (params.p()[i] > 0.0 ? !(v > 1e-14) : v != 0.0) return std::nullopt;
    }
  }
  return PathGrid(times, n, std::move(knots));
}

PathGrid resample(const PathGrid& path, const std::vector<double>& times) {
  const std::size_t n = path.dimension();
  const auto& src = path.times();
  std::vector<double> knots(times.size() * n);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double t = times[k];
    if (t < src.front() || t > src.back()) throw DomainError("resample: time outside the path's range");
    auto it = std::upper_bound(src.begin(), src.end(), t);
    std::size_t j = it == src.end() ? src.size() - 2 : static_cast<std::size_t>(it - src.begin()) - 1;
    if (j >= path.intervals()) j = path.intervals() - 1;
    const double w = (t - src[j]) / (src[j + 1] - src[j]);
    auto a = path.knot(j);
    auto b = path.knot(j + 1);
    for (std::size_t i = 0; i < n; ++i) {
      knots[k * n + i] = w == 0.0 ? a[i] : (w == 1.0 ? b[i] : (1.0 - w) * a[i] + w * b[i]);
    }
  }
  return PathGrid(times, n, std::move(knots));
}

MinimizeResult minimize_action(const ModelParams& params, const MinimizeSpec& spec,
                               const std::optional<PathGrid>& init) {
  spec.validate(params);
  std::vector<std::pair<PathGrid, std::string>> candidates;
  if (init) {
    if (init->dimension() != params.size()) throw DimensionError("minimize_action: init dimension mismatch");
    if (std::abs(init->horizon() - spec.horizon) > 1e-12 * spec.horizon || init->time(0) != 0.0)
      throw DomainError("minimize_action: init does not span [0, T]");
    candidates.emplace_back(*init, "given");
  } else {
    candidates.emplace_back(chart_linear_path(params, spec.start, spec.end, spec.horizon, spec.knots), "linear");
  }
  if (!is_infinite(equilibrium_rate(params, spec.end))) {
    const std::size_t M = init ? init->intervals() : spec.knots;
    if (auto rev = reversed_flow_path(params, spec.fitness, spec.start, spec.end, spec.horizon, M)) {
      candidates.emplace_back(std::move(*rev), "reversed-flow");
    }
  }

  std::optional<MinimizeResult> best;
  std::optional<ConvergenceError> first_error;
  for (const auto& [path, label] : candidates) {
    try {
      MinimizeResult r = run_from(params, spec, path, label);
      if (!best || r.action < best->action) best = std::move(r);
    } catch (const ConvergenceError& e) {
      if (!first_error) first_error = e;
    }
  }
  if (!best) throw *first_error;
  return std::move(*best);
}

SimplexPoint flow_attractor(const ModelParams& params, const std::optional<FitnessMatrix>& V) {
  if (!V) return params.p();
  SimplexPoint x = params.p();
  for (int round = 0; round < 200; ++round) {
    const PathGrid seg = deterministic_flow(params, V, x, {0.0, 10.0}, 400);
    const SimplexPoint y = seg.point(1);
    double change = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) change = std::max(change, std::abs(y[i] - x[i]));
    x = y;
    if (change < 1e-15) break;
  }
  return x;
}

std::vector<QuasiPotentialRow> quasi_potential(const ModelParams& params, const std::optional<FitnessMatrix>& V,
                                               const SimplexPoint& target, const QuasiPotentialOptions& options) {
  if (options.horizons.empty()) throw DomainError("quasi_potential: empty horizon list");
  for (std::size_t k = 1; k < options.horizons.size(); ++k) {
    if (!(options.horizons[k] > options.horizons[k - 1]))
      throw DomainError("quasi_potential: horizons must be strictly increasing");
  }
  const SimplexPoint start = flow_attractor(params, V);
  const std::size_t H = options.horizons.size();
  std::vector<MinimizeSpec> specs;
  for (double T : options.horizons) {
    const auto M = std::max(options.min_knots,
                            static_cast<std::size_t>(std::ceil(options.knots_per_unit_time * T - 1e-9)));
    specs.push_back({start, target, T, M, options.max_iters, options.grad_tol, V});
  }

  // Independent cold starts in parallel.
  std::vector<std::optional<MinimizeResult>> results(H);
  parallel_for(H, [&](std::size_t k) { results[k] = minimize_action(params, specs[k]); });

  // A longer horizon can rest at the attractor first; retry from that path
  // whenever the cold start came out worse than the previous horizon.
  for (std::size_t k = 1; k < H; ++k) {
    if (results[k]->action <= results[k - 1]->action) continue;
    const PathGrid& prev = results[k - 1]->path;
    const double shift = specs[k].horizon - specs[k - 1].horizon;
    std::vector<double> times{0.0};
    std::vector<double> knots(start.weights().begin(), start.weights().end());
    for (std::size_t j = 0; j < prev.knot_count(); ++j) {
      times.push_back(prev.time(j) + shift);
      knots.insert(knots.end(), prev.knot(j).begin(), prev.knot(j).end());
    }
    const PathGrid padded(std::move(times), params.size(), std::move(knots));
    std::vector<double> grid(specs[k].knots + 1);
    for (std::size_t j = 0; j <= specs[k].knots; ++j)
      grid[j] = j == specs[k].knots ? specs[k].horizon
                                    : specs[k].horizon * static_cast<double>(j) / static_cast<double>(specs[k].knots);
    MinimizeResult warm = minimize_action(params, specs[k], resample(padded, grid));
    if (warm.action < results[k]->action) results[k] = std::move(warm);
  }

  std::vector<QuasiPotentialRow> rows;
  double running = kInfinity;
  for (std::size_t k = 0; k < H; ++k) {
    running = std::min(running, results[k]->action);
    rows.push_back({specs[k].horizon, specs[k].knots, results[k]->action, running, results[k]->iterations});
  }
  return rows;
}

}  // namespace wfldp
