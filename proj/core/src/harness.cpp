#include "wfldp/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>

#include "wfldp/action_minimizer.hpp"
#include "wfldp/dirichlet_equilibrium.hpp"
#include "wfldp/parallel.hpp"
#include "wfldp/path_action.hpp"
#include "wfldp/rng.hpp"

namespace wfldp {

namespace {

using json = nlohmann::ordered_json;

json jnum(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

// Rows are accumulated here and written once, by one writer.
struct ResultTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }

  void write(const std::filesystem::path& file, const std::optional<std::string>& failure) const {
    std::ofstream os(file);
    for (std::size_t j = 0; j < header.size(); ++j) os << (j ? "," : "") << header[j];
    os << "\n";
    for (const auto& r : rows) {
      for (std::size_t j = 0; j < r.size(); ++j) os << (j ? "," : "") << r[j];
      os << "\n";
    }
    if (failure) {
      std::string msg = *failure;
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      os << "# FAILED: " << msg << "\n";
    }
  }
};

std::string fd(double v) { return format_double(v); }
std::string fu(std::uint64_t v) { return std::to_string(v); }

SimConfig sim_config(const ExperimentConfig& cfg, std::uint64_t seed) {
  SimConfig s;
  s.dt = cfg.sim.dt;
  s.t_end = cfg.sim.t_end;
  s.record_stride = cfg.sim.record_stride;
  s.boundary_floor = cfg.sim.boundary_floor;
  s.seed = seed;
  try {
    s.validate();
  } catch (const DomainError& e) {
    throw ConfigError("sim", e.what());
  }
  return s;
}

SimplexPoint sim_start(const ExperimentConfig& cfg) {
  return cfg.sim.start ? SimplexPoint(*cfg.sim.start) : SimplexPoint(cfg.model.p);
}

struct Context {
  const ExperimentConfig& cfg;
  std::uint64_t seed;
  ResultTable table;
  json results = json::object();
};

// ---------------------------------------------------------------------------

void run_equilibrium_scan(Context& c) {
  const auto& cfg = c.cfg;
  if (!cfg.event.lower || !cfg.event.upper) throw ConfigError("event.lower", "equilibrium-scan needs a box");
  EventBox box = [&] {
    try {
      return EventBox(*cfg.event.lower, *cfg.event.upper);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("event", e.what());
    }
  }();
  for (std::size_t k = 1; k < cfg.model.gammas.size(); ++k) {
    if (!(cfg.model.gammas[k] < cfg.model.gammas[k - 1]))
      throw ConfigError("model.gamma", "scan gammas must be strictly decreasing");
  }
  ScanOptions opt;
  opt.mode = cfg.scan.monte_carlo ? ScanMode::MonteCarlo : ScanMode::Exact;
  opt.samples = cfg.scan.samples;
  opt.seed = c.seed;
  const ModelParams params = cfg.params();
  c.table.header = {"gamma", "scaled_log_prob", "ci_low", "ci_high", "zero_hit", "samples", "hits", "seed"};
  const auto rows = ldp_scan(params, box, cfg.model.gammas, cfg.fitness, opt);
  for (const auto& r : rows) {
    c.table.add({fd(r.gamma), fd(r.scaled_log_prob), fd(r.ci_low), fd(r.ci_high), r.zero_hit ? "1" : "0",
                 fu(r.samples), fd(r.hits), fu(r.seed)});
  }
  std::optional<ComputeCResult> C;
  if (cfg.fitness) {
    C = compute_C(params, *cfg.fitness);
    c.results["C"] = jnum(C->value);
  }
  const auto inf = box_rate_infimum(params, box, cfg.fitness, cfg.scan.resolution, C);
  c.results["rate_infimum_closure"] = jnum(inf.closure);
  c.results["rate_infimum_interior"] = jnum(inf.interior);
  const bool finite = std::all_of(rows.begin(), rows.end(), [](const ScanRow& r) { return std::isfinite(r.scaled_log_prob); });
  if (rows.size() >= 3 && finite) c.results["richardson_limit"] = jnum(richardson_limit(rows));
}

void run_simulate(Context& c) {
  const auto& cfg = c.cfg;
  const ModelParams params = cfg.params();
  const SimConfig sc = sim_config(cfg, c.seed);
  const SimplexPoint start = sim_start(cfg);
  const std::size_t N = cfg.sim.trajectories;
  if (N > 100000) throw ConfigError("sim.trajectories", "simulate writes every path; at most 100000");
  std::vector<std::optional<Trajectory>> paths(N);
  parallel_for(N, [&](std::size_t i) { paths[i] = simulate(params, cfg.fitness, sc, start, i); });
  const std::size_t n = params.size();
  c.table.header = {"gamma", "seed", "trajectory", "t"};
  for (std::size_t i = 0; i < n; ++i) c.table.header.push_back("x_" + std::to_string(i + 1));
  for (std::size_t i = 0; i < N; ++i) {
    const PathGrid& g = paths[i]->grid;
    for (std::size_t k = 0; k < g.knot_count(); ++k) {
      std::vector<std::string> row = {fd(params.gamma()), fu(c.seed), fu(i), fd(g.time(k))};
      for (double v : g.knot(k)) row.push_back(fd(v));
      c.table.add(std::move(row));
    }
  }
  c.results["trajectories"] = N;
  c.results["steps"] = sc.steps();
}

void run_girsanov_check(Context& c) {
  const auto& cfg = c.cfg;
  if (!cfg.fitness) throw ConfigError("fitness.matrix", "girsanov-check needs a fitness matrix");
  const ModelParams params = cfg.params();
  SimConfig sc = sim_config(cfg, c.seed);
  sc.record_stride = sc.steps();  // only x(T) is needed
  const SimplexPoint start = sim_start(cfg);
  const std::size_t N = cfg.sim.trajectories;

  SimulationLaw neutral;
  neutral.track_weight = true;
  neutral.target_fitness = cfg.fitness;
  std::vector<double> w(N), xw(N), xs(N);
  parallel_for(N, [&](std::size_t i) {
    const Trajectory t = simulate(params, neutral, sc, start, i);
    w[i] = std::exp(*t.girsanov_log_weight);
    xw[i] = t.grid.knot(t.grid.intervals())[0];
  });
  SimConfig sel = sc;
  sel.seed = derive_seed(c.seed, 1);
  parallel_for(N, [&](std::size_t i) {
    const Trajectory t = simulate(params, cfg.fitness, sel, start, i);
    xs[i] = t.grid.knot(t.grid.intervals())[0];
  });

  auto mean_se = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    return std::pair{m, sd / std::sqrt(static_cast<double>(v.size()))};
  };
  std::vector<double> wx(N);
  double sw = 0.0, sw2 = 0.0, swx = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    wx[i] = w[i] * xw[i];
    sw += w[i];
    sw2 += w[i] * w[i];
    swx += wx[i];
  }
  const auto [mw, sew] = mean_se(w);
  const auto [mrw, serw] = mean_se(wx);
  const auto [md, sed] = mean_se(xs);
  const double self_normalized = swx / sw;
  const double ess = sw * sw / sw2;
  const double rel = std::abs(mrw - md) / std::abs(md);

  c.table.header = {"gamma", "seed", "trajectories", "quantity", "value", "std_error"};
  auto row = [&](const char* q, double v, double se) {
    c.table.add({fd(params.gamma()), fu(c.seed), fu(N), q, fd(v), fd(se)});
  };
  row("reweighted_mean_x1", mrw, serw);
  row("self_normalized_mean_x1", self_normalized, std::nan(""));
  row("direct_mean_x1", md, sed);
  row("mean_weight", mw, sew);
  row("weight_ess", ess, std::nan(""));
  row("relative_difference", rel, std::nan(""));
  c.results["reweighted_mean_x1"] = jnum(mrw);
  c.results["direct_mean_x1"] = jnum(md);
  c.results["relative_difference"] = jnum(rel);
  c.results["mean_weight"] = jnum(mw);
  c.results["mean_weight_standard_errors_from_1"] = jnum(std::abs(mw - 1.0) / sew);
}

void run_action(Context& c) {
  const auto& cfg = c.cfg;
  if (cfg.path_file.empty()) throw ConfigError("path.file", "action needs a path file");
  const ModelParams params = cfg.params();
  const PathGrid path = read_path_csv(cfg.path_file);
  if (path.dimension() != params.size()) throw ConfigError("path.file", "path dimension differs from model.p");
  c.table.header = {"quantity", "value"};
  const double neutral = action_neutral(params, path);
  c.table.add({"action_neutral", fd(neutral)});
  c.results["action_neutral"] = jnum(neutral);
  if (cfg.fitness) {
    const double sel = action_selective(params, *cfg.fitness, path);
    const double g = gamma_V(params, *cfg.fitness, path);
    const double gb = gamma_V_boundary_form(params, *cfg.fitness, path);
    c.table.add({"action_selective", fd(sel)});
    c.table.add({"gamma_V", fd(g)});
    c.table.add({"gamma_V_boundary_form", fd(gb)});
    c.table.add({"identity_residual", fd(neutral - g - sel)});
    c.results["action_selective"] = jnum(sel);
    c.results["gamma_V"] = jnum(g);
  }
}

MinimizeSpec minimize_spec(const ExperimentConfig& cfg) {
  if (!cfg.minimize.end) throw ConfigError("minimize.end", "missing");
  const ModelParams params = cfg.params();
  MinimizeSpec spec{cfg.minimize.start ? SimplexPoint(*cfg.minimize.start) : params.p(),
                    SimplexPoint(*cfg.minimize.end),
                    cfg.minimize.horizon,
                    cfg.minimize.knots,
                    cfg.minimize.max_iters,
                    cfg.minimize.grad_tol,
                    cfg.fitness};
  try {
    spec.validate(params);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("minimize", e.what());
  }
  return spec;
}

void run_minimize(Context& c) {
  const ModelParams params = c.cfg.params();
  const MinimizeSpec spec = minimize_spec(c.cfg);
  const MinimizeResult r = minimize_action(params, spec);
  c.table.header = {"t"};
  for (std::size_t i = 0; i < params.size(); ++i) c.table.header.push_back("x_" + std::to_string(i + 1));
  for (std::size_t k = 0; k < r.path.knot_count(); ++k) {
    std::vector<std::string> row = {fd(r.path.time(k))};
    for (double v : r.path.knot(k)) row.push_back(fd(v));
    c.table.add(std::move(row));
  }
  c.results["action"] = jnum(r.action);
  c.results["iterations"] = r.iterations;
  c.results["grad_norm"] = jnum(r.grad_norm);
  c.results["horizon"] = spec.horizon;
  c.results["knots"] = spec.knots;
  c.results["init"] = r.init;
}

void run_quasipotential(Context& c) {
  const auto& cfg = c.cfg;
  if (!cfg.minimize.end) throw ConfigError("minimize.end", "quasipotential needs a target");
  const ModelParams params = cfg.params();
  QuasiPotentialOptions opt;
  opt.horizons = cfg.minimize.horizons;
  opt.max_iters = cfg.minimize.max_iters;
  opt.grad_tol = cfg.minimize.grad_tol;
  const SimplexPoint target(*cfg.minimize.end);
  c.table.header = {"horizon", "knots", "action", "running_min", "iterations"};
  const auto rows = quasi_potential(params, cfg.fitness, target, opt);
  for (const auto& r : rows) {
    c.table.add({fd(r.horizon), fu(r.knots), fd(r.action), fd(r.running_min), fu(r.iterations)});
  }
  c.results["quasi_potential"] = jnum(rows.back().running_min);
  if (!cfg.fitness) c.results["equilibrium_rate"] = jnum(equilibrium_rate(params, target));
}

void run_partition_entropy(Context& c) {
  const auto& pb = c.cfg.partition;
  auto build = [](const std::vector<Atom>& a, const std::vector<DensityPiece>& d, const char* field) {
    try {
      return MeasureOnUnitInterval(a, d);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(field, e.what());
    }
  };
  if (pb.mu_atoms.empty() && pb.mu_density.empty()) throw ConfigError("partition.mu_density", "mu is empty");
  const auto mu = build(pb.mu_atoms, pb.mu_density, "partition.mu");
  const auto nu = (pb.nu_atoms.empty() && pb.nu_density.empty()) ? MeasureOnUnitInterval::lebesgue()
                                                                    : build(pb.nu_atoms, pb.nu_density, "partition.nu");
  const EntropyTable t = entropy_by_refinement(mu, nu, pb.max_level, pb.structural);
  c.table.header = {"level", "cells", "entropy", "closed_form"};
  for (const auto& l : t.levels) c.table.add({fu(l.level), fu(l.cells), fd(l.value), fd(t.closed_form)});
  c.results["finest_level_entropy"] = jnum(t.levels.back().value);
  c.results["closed_form"] = jnum(t.closed_form);
}

void run_path_tube(Context& c) {
  const auto& cfg = c.cfg;
  const ModelParams params = cfg.params();
  const SimConfig sc = sim_config(cfg, c.seed);
  const auto times = recorded_times(sc);
  const SimplexPoint start = sim_start(cfg);
  PathGrid center = [&] {
    switch (cfg.event.center) {
      case TubeCenter::Flow:
        return deterministic_flow(params, cfg.fitness, start, times);
      case TubeCenter::Minimizer: {
        if (!cfg.event.end) throw ConfigError("event.end", "minimizer center needs an endpoint");
        MinimizeSpec spec{start, SimplexPoint(*cfg.event.end), sc.t_end, times.size() - 1,
                          cfg.minimize.max_iters, cfg.minimize.grad_tol, cfg.fitness};
        try {
          spec.validate(params);
        } catch (const std::invalid_argument& e) {
          throw ConfigError("event.end", e.what());
        }
        const auto r = minimize_action(params, spec);
        c.results["center_action"] = jnum(r.action);
        return r.path;
      }
      case TubeCenter::File:
        break;
    }
    PathGrid g = read_path_csv(cfg.event.center_file);
    if (g.dimension() != params.size()) throw ConfigError("event.center", "path dimension differs from model.p");
    return g;
  }();

  c.table.header = {"gamma", "seed", "trajectories", "probability", "ci_low", "ci_high",
                    "scaled_log_prob", "zero_hit", "hits", "ess"};
  for (std::size_t k = 0; k < cfg.model.gammas.size(); ++k) {
    const ModelParams pk = params.with_gamma(cfg.model.gammas[k]);
    const TubeEstimate e = estimate_tube_probability(pk, cfg.fitness, sc, center, cfg.event.delta,
                                                     cfg.sim.trajectories, derive_seed(c.seed, k),
                                                     cfg.event.method == TubeMethod::Tilted);
    c.table.add({fd(e.gamma), fu(e.seed), fu(e.trajectories), fd(e.probability), fd(e.ci_low), fd(e.ci_high),
                 fd(e.scaled_log), e.zero_hit ? "1" : "0", fd(e.hits), fd(e.ess)});
  }
  if (cfg.event.compare) {
    const double ref = tube_endpoint_action(params, cfg.fitness, center, cfg.event.delta, std::min<std::size_t>(times.size() - 1, 256));
    c.results["tube_endpoint_action"] = jnum(ref);
  }
}

}  // namespace

// ---------------------------------------------------------------------------

double chart_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

std::vector<double> tube_control(const ModelParams& params, const std::optional<FitnessMatrix>& V,
                                 const SimConfig& cfg, const PathGrid& center) {
  const std::size_t steps = cfg.steps();
  const std::size_t n = params.size();
  const auto p = params.p().weights();
  std::vector<double> h(steps * n, 0.0), phi(n), vel(n), drift(n), vx(n), r(n);
  std::size_t j = 0;
  for (std::size_t s = 0; s < steps; ++s) {
    const double t = static_cast<double>(s) * cfg.dt;
    while (j + 1 < center.intervals() && center.time(j + 1) <= t) ++j;
    const double span = center.time(j + 1) - center.time(j);
    const double w = (t - center.time(j)) / span;
    auto a = center.knot(j);
    auto b = center.knot(j + 1);
    for (std::size_t i = 0; i < n; ++i) {
      phi[i] = (1.0 - w) * a[i] + w * b[i];
      vel[i] = (b[i] - a[i]) / span;
    }
    kernels::mutation_drift(params.theta(), p, phi, drift);
    if (V) {
      V->apply(phi, vx);
      kernels::apply_covariance(phi, vx, r);
      for (std::size_t i = 0; i < n; ++i) drift[i] += r[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (phi[i] > 0.0) h[s * n + i] = (vel[i] - drift[i]) / phi[i];
    }
  }
  return h;
}

TubeEstimate estimate_tube_probability(const ModelParams& params, const std::optional<FitnessMatrix>& V,
                                       const SimConfig& cfg_in, const PathGrid& center, double delta,
                                       std::size_t trajectories, std::uint64_t seed, bool tilted) {
  if (!(delta > 0.0)) throw DomainError("estimate_tube_probability: delta must be positive");
  if (trajectories == 0) throw DomainError("estimate_tube_probability: need at least one trajectory");
  if (center.dimension() != params.size()) throw DimensionError("estimate_tube_probability: center dimension");
  SimConfig cfg = cfg_in;
  cfg.seed = seed;
  const auto times = recorded_times(cfg);
  if (times.size() != center.knot_count()) throw DomainError("estimate_tube_probability: center is not on the simulation grid");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (std::abs(times[k] - center.time(k)) > 1e-9 * std::max(1.0, cfg.t_end))
      throw DomainError("estimate_tube_probability: center is not on the simulation grid");
  }
  const SimplexPoint start = center.point(0);

  SimulationLaw law;
  law.fitness = V;
  if (tilted) {
    law.control = tube_control(params, V, cfg, center);
    law.track_weight = true;
    law.target_fitness = V;
  }
  std::vector<double> hit(trajectories, 0.0);
  parallel_for(trajectories, [&](std::size_t i) {
    const Trajectory t = simulate(params, law, cfg, start, i);
    for (std::size_t k = 0; k < t.grid.knot_count(); ++k) {
      if (chart_distance(t.grid.knot(k), center.knot(k)) > delta) return;
    }
    hit[i] = tilted ? std::exp(*t.girsanov_log_weight) : 1.0;
  });

  TubeEstimate e{};
  e.gamma = params.gamma();
  e.seed = seed;
  e.trajectories = trajectories;
  const double N = static_cast<double>(trajectories);
  double s = 0.0, s2 = 0.0;
  for (double v : hit) {
    s += v;
    s2 += v * v;
  }
  e.hits = s;
  e.probability = s / N;
  e.ess = s2 > 0.0 ? s * s / s2 : 0.0;
  e.zero_hit = s == 0.0;
  if (!tilted) {
    const auto ci = wilson_interval(s, N);
    e.ci_low = ci.low;
    e.ci_high = ci.high;
  } else {
    const double var = N > 1 ? (s2 - s * s / N) / (N - 1.0) : 0.0;
    const double se = std::sqrt(std::max(0.0, var) / N);
    e.ci_low = std::max(0.0, e.probability - 1.959963984540054 * se);
    e.ci_high = e.probability + 1.959963984540054 * se;
    if (e.zero_hit) e.ci_high = wilson_interval(0.0, N).high;
  }
  e.scaled_log = params.gamma() * std::log(e.zero_hit ? e.ci_high : e.probability);
  return e;
}

double tube_endpoint_action(const ModelParams& params, const std::optional<FitnessMatrix>& V,
                            const PathGrid& center, double delta, std::size_t knots) {
  const std::size_t n = params.size();
  if (n != 2 && n != 3) throw DimensionError("tube_endpoint_action: n must be 2 or 3");
  const SimplexPoint start = center.point(0);
  auto c = center.knot(center.intervals());
  std::vector<std::vector<double>> ends;
  constexpr int kGrid = 10;
  if (n == 2) {
    for (int i = -kGrid; i <= kGrid; ++i) {
      const double a = c[0] + delta * i / kGrid;
      if (a > 0.0 && a < 1.0) ends.push_back({a, 1.0 - a});
    }
  } else {
    for (int i = -kGrid; i <= kGrid; ++i) {
      for (int j = -kGrid; j <= kGrid; ++j) {
        const double a = c[0] + delta * i / kGrid, b = c[1] + delta * j / kGrid;
        if (std::hypot(a - c[0], b - c[1]) > delta) continue;
        if (a > 0.0 && b > 0.0 && a + b < 1.0) ends.push_back({a, b, 1.0 - a - b});
      }
    }
  }
  std::vector<double> best(ends.size(), kInfinity);
  parallel_for(ends.size(), [&](std::size_t k) {
    MinimizeSpec spec{start, SimplexPoint(ends[k]), center.horizon(), knots, 50000, 1e-8, V};
    try {
      best[k] = minimize_action(params, spec).action;
    } catch (const ConvergenceError& e) {
      best[k] = e.best_value();  // still an upper bound
    }
  });
  return *std::min_element(best.begin(), best.end());
}

int run_experiment(const ExperimentConfig& cfg_in, const RunOptions& options, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg = cfg_in;
  if (options.kind) {
    if (cfg.kind && *cfg.kind != *options.kind) {
      err << "config error: experiment.kind is '" << to_string(*cfg.kind) << "' but the subcommand runs '"
          << to_string(*options.kind) << "'\n";
      return kExitConfig;
    }
    cfg.kind = options.kind;
  }
  if (!cfg.kind) {
    err << "config error: experiment.kind: missing\n";
    return kExitConfig;
  }
  const std::filesystem::path out = options.out ? *options.out : cfg.output_dir;
  set_num_threads(options.threads);
  Context c{cfg, options.seed ? *options.seed : cfg.sim.seed, {}, json::object()};

  int code = kExitOk;
  std::optional<std::string> failure;
  try {
    switch (*cfg.kind) {
      case ExperimentKind::EquilibriumScan: run_equilibrium_scan(c); break;
      case ExperimentKind::Simulate: run_simulate(c); break;
      case ExperimentKind::GirsanovCheck: run_girsanov_check(c); break;
      case ExperimentKind::Action: run_action(c); break;
      case ExperimentKind::Minimize: run_minimize(c); break;
      case ExperimentKind::QuasiPotential: run_quasipotential(c); break;
      case ExperimentKind::PartitionEntropy: run_partition_entropy(c); break;
      case ExperimentKind::PathTube: run_path_tube(c); break;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    failure = e.what();
    code = kExitNumerical;
  }

  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) {
    err << "cannot create output directory " << out << ": " << ec.message() << "\n";
    return kExitConfig;
  }
  c.table.write(out / "results.csv", failure);

  json summary;
  summary["kind"] = to_string(*cfg.kind);
  summary["status"] = failure ? "failed" : "ok";
  if (failure) summary["error"] = *failure;
  summary["seed"] = c.seed;
  summary["version"] = kVersion;
  summary["threads"] = num_threads();
  summary["wall_time_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  summary["config"] = cfg.echo;
  summary["results"] = c.results;
  std::ofstream(out / "summary.json") << summary.dump(2) << "\n";
  return code;
}

int run_experiment_file(const std::filesystem::path& config, const RunOptions& options, std::ostream& err) {
  std::optional<ExperimentConfig> cfg;
  try {
    cfg = load_config(config);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  return run_experiment(*cfg, options, err);
}

}  // namespace wfldp
