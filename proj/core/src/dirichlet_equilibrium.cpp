#include "wfldp/dirichlet_equilibrium.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <random>

#include "wfldp/parallel.hpp"
#include "wfldp/quadrature.hpp"
#include "wfldp/rng.hpp"

namespace wfldp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<std::size_t> support_of(const SimplexPoint& p) {
  std::vector<std::size_t> s;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) s.push_back(i);
  }
  return s;
}

// Problem reduced to the support of p: Dirichlet(alpha) on |S| coordinates,
// box bounds and tilt restricted to S.
struct Reduced {
  std::vector<std::size_t> support;
  std::vector<double> alpha, lo, hi;
  bool box_misses_degenerate = false;  // a coordinate outside S is forced > 0
  std::optional<FitnessMatrix> V;
  double inv_gamma;
};

Reduced reduce(const ModelParams& params, const EventBox& box, const std::optional<FitnessMatrix>& V) {
  Reduced r;
  r.support = support_of(params.p());
  r.inv_gamma = 1.0 / params.gamma();
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params.p()[i] == 0.0 && box.lower(i) > 0.0) r.box_misses_degenerate = true;
  }
  for (std::size_t k : r.support) {
    r.alpha.push_back(params.theta() * params.p()[k] / params.gamma());
    r.lo.push_back(box.lower(k));
    r.hi.push_back(box.upper(k));
  }
  if (V) {
    const std::size_t m = r.support.size();
    std::vector<double> sub(m * m);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b) sub[a * m + b] = (*V)(r.support[a], r.support[b]);
    r.V = FitnessMatrix(m, std::move(sub));
  }
  return r;
}

double tilt2(const Reduced& r, double s) {
  if (!r.V) return 0.0;
  const double x[2] = {s, 1.0 - s};
  return r.V->quadratic(x) * r.inv_gamma;
}

double tilt3(const Reduced& r, double a, double b) {
  if (!r.V) return 0.0;
  const double x[3] = {a, b, std::max(0.0, 1.0 - a - b)};
  return r.V->quadratic(x) * r.inv_gamma;
}

// log Pi(x_0 in [lo, hi]) for Beta(a0, a1) via the regularized incomplete beta.
double log_beta_interval(double a0, double a1, double lo, double hi) {
  if (!(hi > lo)) return kNegInf;
  using boost::math::ibeta;
  using boost::math::ibetac;
  const double mean = a0 / (a0 + a1);
  double p;
  if (lo >= mean) {
    p = ibetac(a0, a1, lo) - (hi >= 1.0 ? 0.0 : ibetac(a0, a1, hi));
  } else {
    p = (hi >= 1.0 ? 1.0 : ibeta(a0, a1, hi)) - (lo <= 0.0 ? 0.0 : ibeta(a0, a1, lo));
  }
  return p > 0.0 ? std::log(p) : kNegInf;
}

double log_prob_support2(const Reduced& r) {
  const double lo = std::max({r.lo[0], 1.0 - r.hi[1], 0.0});
  const double hi = std::min({r.hi[0], 1.0 - r.lo[1], 1.0});
  if (lo > hi) return kNegInf;
  if (!r.V) return lo == hi ? kNegInf : log_beta_interval(r.alpha[0], r.alpha[1], lo, hi);
  auto smooth = [&](double s) { return tilt2(r, s); };
  const double num = log_integrate_beta_weighted(smooth, r.alpha[0], r.alpha[1], lo, hi);
  const double Z = log_integrate_beta_weighted(smooth, r.alpha[0], r.alpha[1], 0.0, 1.0);
  return std::min(0.0, num - Z);
}

// log of integral over {x in box} of the unnormalized Dirichlet(alpha) density
// times the tilt, for three support coordinates. The inner variable is
// s = x_1 / (1 - x_0), which turns the inner integral into a Beta(alpha_1,
// alpha_2) integral; the outer weight is x_0^(a0-1) (1-x_0)^(a1+a2-1).
double log_mass_support3(const Reduced& r, const std::vector<double>& lo, const std::vector<double>& hi) {
  const double a0 = r.alpha[0], a1 = r.alpha[1], a2 = r.alpha[2];
  const double x0_lo = std::max({lo[0], 1.0 - hi[1] - hi[2], 0.0});
  const double x0_hi = std::min({hi[0], 1.0 - lo[1] - lo[2], 1.0});
  if (!(x0_hi > x0_lo)) return kNegInf;

  auto inner = [&](double x0) {
    const double rest = 1.0 - x0;
    if (!(rest > 0.0)) return kNegInf;
    const double s_lo = std::max({lo[1], rest - hi[2], 0.0}) / rest;
    const double s_hi = std::min({hi[1], rest - lo[2], rest}) / rest;
    if (!(s_hi > s_lo)) return kNegInf;
    if (!r.V) {
      const double lb = log_beta_interval(a1, a2, std::max(0.0, s_lo), std::min(1.0, s_hi));
      return lb + std::lgamma(a1) + std::lgamma(a2) - std::lgamma(a1 + a2);
    }
    auto smooth = [&](double s) { return tilt3(r, x0, s * rest); };
    return log_integrate_beta_weighted(smooth, a1, a2, std::max(0.0, s_lo), std::min(1.0, s_hi), 1e-11);
  };

  // The inner limits switch formula at these x0 values; integrate piecewise.
  std::vector<double> cuts = {x0_lo, x0_hi};
  for (double c : {1.0 - lo[1] - hi[2], 1.0 - hi[1] - lo[2], 1.0 - hi[1] - hi[2], 1.0 - lo[1] - lo[2]}) {
    if (c > x0_lo && c < x0_hi) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  double total = kNegInf;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    if (!(cuts[k + 1] > cuts[k])) continue;
    total = log_add(total, log_integrate_beta_weighted(inner, a0, a1 + a2, cuts[k], cuts[k + 1], 1e-10));
  }
  return total;
}

double log_prob_support3(const Reduced& r) {
  const std::vector<double> zero(3, 0.0), one(3, 1.0);
  const double num = log_mass_support3(r, r.lo, r.hi);
  if (num == kNegInf) return kNegInf;
  const double Z = log_mass_support3(r, zero, one);
  return std::min(0.0, num - Z);
}

}  // namespace

// ---------------------------------------------------------------------------
// EventBox

EventBox::EventBox(std::vector<double> lower, std::vector<double> upper)
    : lo_(std::move(lower)), hi_(std::move(upper)) {
  if (lo_.size() != hi_.size() || lo_.size() < 2) throw DimensionError("EventBox: bounds of unequal length");
  double slo = 0.0, shi = 0.0;
  for (std::size_t i = 0; i < lo_.size(); ++i) {
    if (!(lo_[i] >= 0.0 && hi_[i] <= 1.0 && lo_[i] <= hi_[i]))
      throw DomainError("EventBox: need 0 <= a_i <= b_i <= 1");
    slo += lo_[i];
    shi += hi_[i];
  }
  if (slo > 1.0 + 1e-12 || shi < 1.0 - 1e-12) throw DomainError("EventBox: box does not meet the simplex");
}

EventBox EventBox::whole(std::size_t n) {
  return EventBox(std::vector<double>(n, 0.0), std::vector<double>(n, 1.0));
}

bool EventBox::contains(const SimplexPoint& x) const {
  if (x.size() != size()) throw DimensionError("EventBox::contains: dimension mismatch");
  for (std::size_t i = 0; i < size(); ++i) {
    if (x[i] < lo_[i] || x[i] > hi_[i]) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Sampling

SampleBatch dirichlet_sample(const ModelParams& params, std::size_t count, std::uint64_t seed) {
  if (count == 0) throw DomainError("dirichlet_sample: count must be >= 1");
  const std::size_t n = params.size();
  std::vector<double> alpha(n);
  for (std::size_t i = 0; i < n; ++i) alpha[i] = params.theta() * params.p()[i] / params.gamma();

  std::vector<std::vector<double>> raw(count);
  parallel_for(count, [&](std::size_t d) {
    Xoshiro256pp rng = stream_engine(seed, d);
    std::vector<double> lg(n, kNegInf);
    double m = kNegInf;
    for (std::size_t i = 0; i < n; ++i) {
      if (alpha[i] == 0.0) continue;
      if (alpha[i] >= 1.0) {
        std::gamma_distribution<double> g(alpha[i], 1.0);
        lg[i] = std::log(g(rng));
      } else {
        // Gamma(a) = Gamma(a+1) U^(1/a), kept in log space so tiny shapes
        // do not underflow to an all-zero vector.
        std::gamma_distribution<double> g(alpha[i] + 1.0, 1.0);
        lg[i] = std::log(g(rng)) + std::log(rng.uniform_open()) / alpha[i];
      }
      m = std::max(m, lg[i]);
    }
    std::vector<double> x(n, 0.0);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (lg[i] == kNegInf) continue;
      x[i] = std::exp(lg[i] - m);
      s += x[i];
    }
    for (double& v : x) v /= s;
    raw[d] = std::move(x);
  });

  SampleBatch batch{{}, std::vector<double>(count, 1.0), seed, params, static_cast<double>(count), std::nullopt};
  batch.points.reserve(count);
  for (auto& x : raw) batch.points.emplace_back(std::move(x));
  return batch;
}

double dirichlet_log_density(const ModelParams& params, const SimplexPoint& x) {
  if (x.size() != params.size()) throw DimensionError("dirichlet_log_density: dimension mismatch");
  if (!params.p().strictly_positive()) {
    throw DomainError(
        "dirichlet_log_density: p has zero components; the law lives on a face, use the "
        "restricted-support sampler");
  }
  const double a0 = params.theta() / params.gamma();
  double v = std::lgamma(a0);
  bool pos_inf = false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = params.theta() * params.p()[i] / params.gamma();
    v -= std::lgamma(a);
    if (a == 1.0) continue;
    if (x[i] == 0.0) {
      if (a > 1.0) return kNegInf;
      pos_inf = true;
      continue;
    }
    v += (a - 1.0) * std::log(x[i]);
  }
  return pos_inf ? kInfinity : v;
}

double exact_event_log_prob(const ModelParams& params, const EventBox& box,
                            const std::optional<FitnessMatrix>& V) {
  if (box.size() != params.size()) throw DimensionError("exact_event_prob: box dimension mismatch");
  if (V && V->size() != params.size()) throw DimensionError("exact_event_prob: fitness dimension mismatch");
  if (params.size() > 3) throw DimensionError("exact_event_prob: only n <= 3 is supported");
  const Reduced r = reduce(params, box, V);
  if (r.box_misses_degenerate) return kNegInf;
  switch (r.support.size()) {
    case 1:
      return (r.lo[0] <= 1.0 && r.hi[0] >= 1.0) ? 0.0 : kNegInf;
    case 2:
      return log_prob_support2(r);
    default:
      return log_prob_support3(r);
  }
}

double exact_event_prob(const ModelParams& params, const EventBox& box, const std::optional<FitnessMatrix>& V) {
  return std::exp(exact_event_log_prob(params, box, V));
}

double exact_expectation_n2(const ModelParams& params, const std::optional<FitnessMatrix>& V,
                            const std::function<double(double)>& g) {
  if (params.size() != 2 || !params.p().strictly_positive())
    throw DimensionError("exact_expectation_n2: needs n = 2 with p > 0");
  const Reduced r = reduce(params, EventBox::whole(2), V);
  auto base = [&](double s) { return tilt2(r, s); };
  auto weighted = [&](double s) {
    const double v = g(s);
    if (v < 0.0) throw DomainError("exact_expectation_n2: g must be non-negative");
    return v > 0.0 ? tilt2(r, s) + std::log(v) : kNegInf;
  };
  const double Z = log_integrate_beta_weighted(base, r.alpha[0], r.alpha[1], 0.0, 1.0);
  const double num = log_integrate_beta_weighted(weighted, r.alpha[0], r.alpha[1], 0.0, 1.0);
  return std::exp(num - Z);
}

SampleBatch tilted_sample(const ModelParams& params, const FitnessMatrix& V, std::size_t count,
                          std::uint64_t seed) {
  if (V.size() != params.size()) throw DimensionError("tilted_sample: fitness dimension mismatch");
  if (!params.p().strictly_positive()) throw DomainError("tilted_sample: p must be strictly positive");
  SampleBatch batch = dirichlet_sample(params, count, seed);
  std::vector<double> lw(count);
  double m = kNegInf;
  for (std::size_t i = 0; i < count; ++i) {
    lw[i] = mean_fitness(V, batch.points[i]) / params.gamma();
    m = std::max(m, lw[i]);
  }
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    // Keep weights strictly positive even when the tilt spans > 700 nats.
    batch.weights[i] = std::max(std::exp(lw[i] - m), std::numeric_limits<double>::min());
    s += batch.weights[i];
    s2 += batch.weights[i] * batch.weights[i];
  }
  batch.ess = s * s / s2;
  if (batch.ess < 0.01 * static_cast<double>(count)) {
    batch.warning = "weight degeneracy: ESS " + std::to_string(batch.ess) + " below 1% of " +
                    std::to_string(count) + " draws";
  }
  return batch;
}

// ---------------------------------------------------------------------------
// Scans

WilsonInterval wilson_interval(double hits, double n, double z) {
  const double phat = hits / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (phat + z2 / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(std::max(0.0, phat * (1.0 - phat) / n + z2 / (4.0 * n * n)));
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

std::vector<ScanRow> ldp_scan(const ModelParams& params_template, const EventBox& box,
                              const std::vector<double>& gammas, const std::optional<FitnessMatrix>& V,
                              const ScanOptions& options) {
  if (gammas.empty()) throw DomainError("ldp_scan: empty gamma list");
  for (std::size_t k = 1; k < gammas.size(); ++k) {
    if (!(gammas[k] < gammas[k - 1])) throw DomainError("ldp_scan: gammas must be strictly decreasing");
  }
  std::vector<ScanRow> rows;
  rows.reserve(gammas.size());
  for (std::size_t k = 0; k < gammas.size(); ++k) {
    const ModelParams params = params_template.with_gamma(gammas[k]);
    ScanRow row{};
    row.gamma = gammas[k];
    if (options.mode == ScanMode::Exact) {
      row.scaled_log_prob = gammas[k] * exact_event_log_prob(params, box, V);
      row.ci_low = row.ci_high = row.scaled_log_prob;
      rows.push_back(row);
      continue;
    }
    row.seed = derive_seed(options.seed, k);
    row.samples = options.samples;
    const SampleBatch batch =
        V ? tilted_sample(params, *V, options.samples, row.seed) : dirichlet_sample(params, options.samples, row.seed);
    double wsum = 0.0, whit = 0.0;
    for (std::size_t i = 0; i < batch.points.size(); ++i) {
      wsum += batch.weights[i];
      if (box.contains(batch.points[i])) whit += batch.weights[i];
    }
    const double phat = whit / wsum;
    const double n_eff = batch.ess;
    row.hits = phat * static_cast<double>(options.samples);
    const auto ci = wilson_interval(phat * n_eff, n_eff);
    if (whit == 0.0) {
      row.zero_hit = true;
      row.scaled_log_prob = gammas[k] * std::log(ci.high);
      row.ci_low = kNegInf;
    } else {
      row.scaled_log_prob = gammas[k] * std::log(phat);
      row.ci_low = gammas[k] * std::log(ci.low);
    }
    row.ci_high = gammas[k] * std::log(ci.high);
    rows.push_back(row);
  }
  return rows;
}

double richardson_limit(const std::vector<ScanRow>& rows) {
  if (rows.size() < 3) throw DomainError("richardson_limit: need at least 3 rows");
  Eigen::MatrixXd A(static_cast<Eigen::Index>(rows.size()), 3);
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const double g = rows[k].gamma;
    const auto i = static_cast<Eigen::Index>(k);
    A(i, 0) = 1.0;
    A(i, 1) = g * std::log(1.0 / g);
    A(i, 2) = g;
    y(i) = rows[k].scaled_log_prob;
  }
  if (!y.allFinite()) throw NumericalError("richardson_limit: non-finite scan value");
  const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(y);
  return coef(0);
}

BoxRateInfimum box_rate_infimum(const ModelParams& params, const EventBox& box,
                                const std::optional<FitnessMatrix>& V, double resolution,
                                const std::optional<ComputeCResult>& c_in) {
  const std::size_t n = params.size();
  if (n > 3) throw DimensionError("box_rate_infimum: only n <= 3 is supported");
  if (box.size() != n) throw DimensionError("box_rate_infimum: box dimension mismatch");
  std::optional<ComputeCResult> c = c_in;
  if (V && !c) c = compute_C(params, *V);
  auto rate = [&](const std::vector<double>& w) {
    const SimplexPoint x(w);
    return V ? selection_equilibrium_rate(params, *V, x, *c) : equilibrium_rate(params, x);
  };
  // "inside" means strictly inside every box face that is not a simplex face.
  auto inside = [&](const std::vector<double>& w) {
    for (std::size_t i = 0; i < n; ++i) {
      if (box.lower(i) > 0.0 && !(w[i] > box.lower(i))) return false;
      if (box.upper(i) < 1.0 && !(w[i] < box.upper(i))) return false;
    }
    return true;
  };
  auto in_closure = [&](const std::vector<double>& w) {
    for (std::size_t i = 0; i < n; ++i) {
      if (w[i] < box.lower(i) || w[i] > box.upper(i)) return false;
    }
    return true;
  };
  BoxRateInfimum out{kInfinity, kInfinity};
  auto consider = [&](std::vector<double> w) {
    if (in_closure(w)) out.closure = std::min(out.closure, rate(w));
    if (inside(w)) out.interior = std::min(out.interior, rate(w));
  };
  const long steps = static_cast<long>(std::ceil(1.0 / resolution));
  if (n == 2) {
    const double lo = std::max(box.lower(0), 1.0 - box.upper(1));
    const double hi = std::min(box.upper(0), 1.0 - box.lower(1));
    for (long s = 0; s <= steps; ++s) {
      const double a = std::min(1.0, static_cast<double>(s) * resolution);
      consider({a, 1.0 - a});
    }
    // Exact faces, and points just inside them for the interior infimum.
    for (double a : {lo, hi, lo + 1e-12, hi - 1e-12}) {
      if (a >= 0.0 && a <= 1.0) consider({a, 1.0 - a});
    }
  } else {
    for (long i = 0; i <= steps; ++i) {
      const double a = std::min(1.0, static_cast<double>(i) * resolution);
      for (long j = 0; i + j <= steps; ++j) {
        const double b = std::min(1.0 - a, static_cast<double>(j) * resolution);
        consider({a, b, std::max(0.0, 1.0 - a - b)});
      }
    }
  }
  return out;
}

}  // namespace wfldp
