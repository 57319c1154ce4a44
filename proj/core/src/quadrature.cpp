#include "wfldp/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>

namespace wfldp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Integrate exp(log_f(u)) on [lo, hi] where log_f is bounded above.
double log_integrate_bounded(const std::function<double(double)>& log_f, double lo, double hi,
                             double rel_tol) {
  if (!(hi > lo)) return kNegInf;
  // Below ~1e-12 the error estimate sits at the rounding floor of exp(v - shift)
  // and the recursion never terminates early.
  rel_tol = std::max(rel_tol, 1e-12);
  // Shift by the largest sampled value; GK then sees numbers of order one.
  constexpr int kScan = 257;
  double shift = kNegInf;
  double peak = lo;
  for (int k = 0; k < kScan; ++k) {
    const double u = lo + (hi - lo) * (static_cast<double>(k) / (kScan - 1));
    const double v = log_f(u);
    if (std::isfinite(v) && v > shift) {
      shift = v;
      peak = u;
    }
  }
  if (shift == kNegInf) return kNegInf;
  auto f = [&](double u) {
    const double v = log_f(u);
    return std::isfinite(v) ? std::exp(v - shift) : 0.0;
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  double err = 0.0;
  // Split at the sampled peak so a narrow mode always sits on a panel edge.
  double val = 0.0;
  if (peak > lo && peak < hi) {
    val = GK::integrate(f, lo, peak, 18, rel_tol, &err) + GK::integrate(f, peak, hi, 18, rel_tol, &err);
  } else {
    val = GK::integrate(f, lo, hi, 18, rel_tol, &err);
  }
  if (!(val > 0.0)) return kNegInf;
  return shift + std::log(val);
}

}  // namespace

double log_add(double a, double b) noexcept {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

double log_integrate_beta_weighted(const std::function<double(double)>& smooth, double alpha,
                                   double beta, double a, double b, double rel_tol) {
  a = std::clamp(a, 0.0, 1.0);
  b = std::clamp(b, 0.0, 1.0);
  if (!(b > a)) return kNegInf;

  auto log_weight = [&](double x) {
    double v = smooth(x);
    if (alpha != 1.0) v += (alpha - 1.0) * std::log(x);
    if (beta != 1.0) v += (beta - 1.0) * std::log1p(-x);
    return v;
  };

  const double mid = 0.5 * (a + b);
  double left, right;

  if (a == 0.0 && alpha < 1.0) {
    // x = u^(1/alpha): x^(alpha-1) dx = du / alpha
    left = log_integrate_bounded(
        [&](double u) {
          const double x = std::pow(u, 1.0 / alpha);
          double v = smooth(x) - std::log(alpha);
          if (beta != 1.0) v += (beta - 1.0) * std::log1p(-x);
          return v;
        },
        0.0, std::pow(mid, alpha), rel_tol);
  } else {
    left = log_integrate_bounded(log_weight, a, mid, rel_tol);
  }

  if (b == 1.0 && beta < 1.0) {
    // 1 - x = v^(1/beta)
    right = log_integrate_bounded(
        [&](double v) {
          const double y = std::pow(v, 1.0 / beta);
          double r = smooth(1.0 - y) - std::log(beta);
          if (alpha != 1.0) r += (alpha - 1.0) * std::log1p(-y);
          return r;
        },
        0.0, std::pow(1.0 - mid, beta), rel_tol);
  } else {
    right = log_integrate_bounded(log_weight, mid, b, rel_tol);
  }
  return log_add(left, right);
}

}  // namespace wfldp
