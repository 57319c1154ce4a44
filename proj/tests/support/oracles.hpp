#pragma once

// Reference computations for the tests. Nothing here calls into wfldp, so a
// shared bug cannot make both sides agree.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using ld = long double;

inline ld entropy(const std::vector<ld>& p, const std::vector<ld>& x) {
  ld h = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0) continue;
    if (x[i] == 0) return std::numeric_limits<ld>::infinity();
    h += p[i] * std::log(p[i] / x[i]);
  }
  return h;
}

// log of int_a^b exp(log_f(x, x - a, b - x)) dx by tanh-sinh, every node
// evaluated with exact endpoint distances. Levels are refined until two agree
// to `tol` in log.
inline ld log_tanh_sinh(const std::function<ld(ld, ld, ld)>& log_f, ld a, ld b, ld tol = 1e-15L) {
  const ld half = (b - a) / 2;
  const ld pi2 = std::numbers::pi_v<ld> / 2;
  ld prev = std::numeric_limits<ld>::quiet_NaN();
  for (int level = 3; level <= 12; ++level) {
    const ld h = std::ldexp(1.0L, -level);
    std::vector<ld> logs, w;
    for (long j = -static_cast<long>(7.0L / h); j <= static_cast<long>(7.0L / h); ++j) {
      const ld t = j * h;
      const ld u = pi2 * std::sinh(t);
      const ld e = std::exp(-2 * std::fabs(u));
      const ld gap = half * 2 * e / (1 + e);  // distance to the nearer end
      if (!(gap > 0)) continue;
      ld xa, xb;
      if (t >= 0) {
        xb = gap;
        xa = 2 * half - gap;
      } else {
        xa = gap;
        xb = 2 * half - gap;
      }
      const ld x = t >= 0 ? b - xb : a + xa;
      const ld cu = std::cosh(u);
      const ld v = log_f(x, xa, xb);
      if (!std::isfinite(v)) continue;
      logs.push_back(v);
      w.push_back(half * h * pi2 * std::cosh(t) / (cu * cu));
    }
    if (logs.empty()) return -std::numeric_limits<ld>::infinity();
    const ld shift = *std::max_element(logs.begin(), logs.end());
    ld s = 0;
    for (std::size_t k = 0; k < logs.size(); ++k) s += w[k] * std::exp(logs[k] - shift);
    const ld cur = shift + std::log(s);
    if (std::fabs(cur - prev) < tol) return cur;
    prev = cur;
  }
  return prev;
}

// log P(lo <= X <= hi) for X ~ Beta(alpha, beta), optionally with the extra
// log-weight `tilt(x)` and normalized over [0,1].
inline ld log_beta_prob(ld alpha, ld beta, ld lo, ld hi, const std::function<ld(ld)>& tilt = nullptr) {
  auto integrand = [&](ld lo_, ld hi_) {
    return log_tanh_sinh(
        [&](ld x, ld xa, ld xb) {
          const ld left = lo_ == 0 ? xa : x;       // x itself, exact near 0
          const ld right = hi_ == 1 ? xb : 1 - x;  // 1 - x, exact near 1
          ld v = (alpha - 1) * std::log(left) + (beta - 1) * std::log(right);
          if (tilt) v += tilt(x);
          return v;
        },
        lo_, hi_);
  };
  if (!tilt) return integrand(lo, hi) - (std::lgamma(alpha) + std::lgamma(beta) - std::lgamma(alpha + beta));
  // [0,1] is split at 1/2 so each end's distance is exact
  const ld z0 = integrand(0, 0.5L), z1 = integrand(0.5L, 1);
  const ld z = std::max(z0, z1) + std::log1p(std::exp(-std::fabs(z0 - z1)));
  return integrand(lo, hi) - z;
}

// Regularized incomplete beta by Lentz's continued fraction.
inline ld incomplete_beta(ld a, ld b, ld x) {
  if (x <= 0) return 0;
  if (x >= 1) return 1;
  if (x > (a + 1) / (a + b + 2)) return 1 - incomplete_beta(b, a, 1 - x);
  const ld lfront = a * std::log(x) + b * std::log1p(-x) - std::log(a) -
                    (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
  const ld tiny = 1e-300L;
  ld f = 1, c = 1, d = 0;
  for (int i = 0; i <= 400; ++i) {
    const int m = i / 2;
    ld num;
    if (i == 0) num = 1;
    else if (i % 2 == 0) num = m * (b - m) * x / ((a + 2 * m - 1) * (a + 2 * m));
    else num = -((a + m) * (a + b + m) * x) / ((a + 2 * m) * (a + 2 * m + 1));
    d = 1 + num * d;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1 / d;
    c = 1 + num / c;
    if (std::fabs(c) < tiny) c = tiny;
    const ld cd = c * d;
    f *= cd;
    if (std::fabs(1 - cd) < 1e-18L) break;
  }
  return std::exp(lfront) * (f - 1);
}

// One-sample Kolmogorov-Smirnov: statistic and asymptotic p-value.
struct KsResult {
  double statistic;
  double p_value;
};
inline KsResult ks_test(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  const double lam = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  double p = 0;
  for (int j = 1; j <= 100; ++j) p += 2 * (j % 2 ? 1 : -1) * std::exp(-2 * j * j * lam * lam);
  return {d, std::clamp(p, 0.0, 1.0)};
}

// Zero-noise neutral flow in closed form.
inline std::vector<double> linear_flow(double theta, const std::vector<double>& p, const std::vector<double>& x0,
                                       double t) {
  std::vector<double> x(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) x[i] = p[i] + (x0[i] - p[i]) * std::exp(-0.5 * theta * t);
  return x;
}

// u' D^{-1} u on the first n-1 coordinates, D inverted numerically.
inline double chart_quadratic_form(const std::vector<double>& x, const std::vector<double>& u) {
  const int m = static_cast<int>(x.size()) - 1;
  Eigen::MatrixXd D(m, m);
  Eigen::VectorXd v(m);
  for (int k = 0; k < m; ++k) {
    v(k) = u[k];
    for (int l = 0; l < m; ++l) D(k, l) = x[k] * ((k == l ? 1.0 : 0.0) - x[l]);
  }
  return v.dot(D.inverse() * v);
}

// sup_f [t'f - 1/2 f'D f] over f in R^n by solving the stationarity system on
// the chart (f_n = 0 is a free gauge since t sums to zero).
inline double legendre_sup(const std::vector<double>& mu, const std::vector<double>& t) {
  return 0.5 * chart_quadratic_form(mu, t);
}

// Scalar Cauchy-Schwarz bound on the Girsanov weight moments, used as a
// sanity check: (E w)^2 <= E w^2.
inline bool cauchy_schwarz_holds(const std::vector<double>& w) {
  long double s = 0, s2 = 0;
  for (double v : w) {
    s += v;
    s2 += static_cast<long double>(v) * v;
  }
  const long double n = static_cast<long double>(w.size());
  return (s / n) * (s / n) <= s2 / n * (1 + 1e-15L);
}

// Two-allele Euler-Lagrange system for the neutral action,
//   x' = x(1-x) q + b(x),  q' = -[(1-2x) q^2 / 2 - theta q / 2],
// with action int x(1-x) q^2 / 2 dt. Shooting on q(0) by bisection.
struct ShootingResult {
  ld q0;
  ld action;
  ld end;
};
inline ShootingResult shoot_n2(ld theta, ld p1, ld x0, ld x1, ld T, int steps = 20000) {
  auto run = [&](ld q0, ld* action) {
    ld x = x0, q = q0, a = 0, x_prev = x0;
    const ld h = T / steps;
    auto fx = [&](ld x_, ld q_) { return x_ * (1 - x_) * q_ + theta / 2 * (p1 - x_); };
    auto fq = [&](ld x_, ld q_) { return -((1 - 2 * x_) * q_ * q_ / 2 - theta / 2 * q_); };
    auto fa = [&](ld x_, ld q_) { return x_ * (1 - x_) * q_ * q_ / 2; };
    for (int s = 0; s < steps; ++s) {
      const ld k1x = fx(x, q), k1q = fq(x, q), k1a = fa(x, q);
      const ld k2x = fx(x + h / 2 * k1x, q + h / 2 * k1q), k2q = fq(x + h / 2 * k1x, q + h / 2 * k1q),
               k2a = fa(x + h / 2 * k1x, q + h / 2 * k1q);
      const ld k3x = fx(x + h / 2 * k2x, q + h / 2 * k2q), k3q = fq(x + h / 2 * k2x, q + h / 2 * k2q),
               k3a = fa(x + h / 2 * k2x, q + h / 2 * k2q);
      const ld k4x = fx(x + h * k3x, q + h * k3q), k4q = fq(x + h * k3x, q + h * k3q),
               k4a = fa(x + h * k3x, q + h * k3q);
      x += h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x);
      q += h / 6 * (k1q + 2 * k2q + 2 * k3q + k4q);
      a += h / 6 * (k1a + 2 * k2a + 2 * k3a + k4a);
      // Once the costate blows up RK4 output is garbage; report the exit by the
      // side the last sound state was on.
      if (!(x > 1e-4L && x < 1 - 1e-4L && std::fabs(q) < 1e6L)) return x_prev > 0.5L ? ld(2) : ld(-1);
      x_prev = x;
    }
    if (action) *action = a;
    return x;
  };
  // x(T) is increasing in q0; bracket then bisect.
  ld lo = -0.1L, hi = 0.1L;
  while (run(lo, nullptr) > x1) lo *= 1.5L;
  while (run(hi, nullptr) < x1) hi *= 1.5L;
  for (int it = 0; it < 200; ++it) {
    const ld mid = (lo + hi) / 2;
    if (run(mid, nullptr) < x1) lo = mid;
    else hi = mid;
  }
  ld action = 0;
  const ld end = run((lo + hi) / 2, &action);
  return {(lo + hi) / 2, action, end};
}

// C = sup_x [x^2 - theta H(p|x)] for V = [[1,0],[0,0]], n = 2, by grid search.
inline ld grid_C_n2(ld theta, ld p1, ld resolution = 1e-6L, ld* argmax = nullptr) {
  ld best = -std::numeric_limits<ld>::infinity(), arg = p1;
  const long steps = std::lround(1 / resolution);
  for (long k = 1; k < steps; ++k) {
    const ld x = k * resolution;
    const ld v = x * x - theta * entropy({p1, 1 - p1}, {x, 1 - x});
    if (v > best) {
      best = v;
      arg = x;
    }
  }
  if (argmax) *argmax = arg;
  return best;
}

// Midpoint action of the linear path into the boundary, integrated exactly:
// on [0,1] with x_1 = (1 - s)/2 the integrand is 2 (1/2 + s/4)^2 / (1 - s^2).
inline ld linear_boundary_action(ld t) {
  // 2(1/2 + s/4)^2 = (s+2)^2 / 8; (s+2)^2/(1-s^2) = -1 + (4s + 5)/(1-s^2)
  //   (4s + 5)/(1 - s^2) = (9/2)/(1-s) + (1/2)/(1+s)
  return (-t + 4.5L * -std::log1p(-t) + 0.5L * std::log1p(t)) / 8;
}

inline std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t n, double floor = 0.0) {
  std::gamma_distribution<double> g(1.0, 1.0);
  std::vector<double> x(n);
  double s = 0;
  for (auto& v : x) s += (v = g(rng) + floor);
  for (auto& v : x) v /= s;
  return x;
}

}  // namespace oracle
