#pragma once

#include <functional>

namespace wfldp {

/// log of  integral_a^b x^(alpha-1) (1-x)^(beta-1) exp(smooth(x)) dx  for
/// 0 <= a <= b <= 1.
///
/// Integrable power singularities at x = 0 (alpha < 1) and x = 1 (beta < 1)
/// are removed with the substitutions x = u^(1/alpha) and 1 - x = v^(1/beta).
/// Everything is evaluated relative to the largest sampled log-integrand, so
/// sharply peaked weights (alpha, beta ~ 1e2) do not overflow.
/// Returns -inf for an empty interval.
double log_integrate_beta_weighted(const std::function<double(double)>& smooth, double alpha,
                                   double beta, double a, double b, double rel_tol = 1e-12);

/// log(exp(a) + exp(b)) without overflow.
double log_add(double a, double b) noexcept;

}  // namespace wfldp
