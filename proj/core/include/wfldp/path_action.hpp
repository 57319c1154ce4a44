#pragma once

// Discretized Freidlin-Wentzell action functionals on piecewise-linear paths.
//
// Every functional uses the same midpoint rule: on interval k the velocity is
// (x_{k+1} - x_k) / dt_k and all state-dependent terms are evaluated at the
// midpoint (x_k + x_{k+1}) / 2. With that convention the quadratic-form,
// completing-the-square and dual-norm identities hold node by node.

#include <span>
#include <vector>

#include "wfldp/core_model.hpp"
#include "wfldp/path_grid.hpp"

namespace wfldp {

/// 1/2 int sum_i (phi_i' - b_i(phi))^2 / phi_i dt.  +inf if a knot or
/// midpoint touches zero on supp(p), or a coordinate outside supp(p) moves.
double action_neutral(const ModelParams& params, const PathGrid& path);

/// Same with drift b + r, r the replicator drift of V.
double action_selective(const ModelParams& params, const FitnessMatrix& V, const PathGrid& path);

/// int <phi' - b(phi), V phi> dt - 1/2 int (V phi)' D(phi) (V phi) dt.
double gamma_V(const ModelParams& params, const FitnessMatrix& V, const PathGrid& path);

/// Boundary-term form: 1/2 [phi'V phi]_0^T - int b'V phi dt - 1/2 int (V phi)'D(V phi) dt.
/// Agrees with gamma_V for symmetric V.
double gamma_V_boundary_form(const ModelParams& params, const FitnessMatrix& V, const PathGrid& path);

struct ProfilePoint {
  double t;
  double action;  // action restricted to [0, t]
};

/// Cumulative neutral action at every knot; +inf from the first infeasible
/// interval on.
std::vector<ProfilePoint> boundary_blowup_profile(const ModelParams& params, const PathGrid& path);

namespace detail {

/// Midpoint action of a flat (M+1) x n knot array. V may be null (neutral).
/// If `grad` is non-empty it receives d(action)/d(knot coordinate) with the
/// n coordinates of each knot treated as independent. Returns +inf (and leaves
/// grad unspecified) for infeasible paths.
double midpoint_action(double theta, std::span<const double> p, const FitnessMatrix* V,
                       std::span<const double> times, std::size_t n, std::span<const double> knots,
                       std::span<double> grad = {});

}  // namespace detail

}  // namespace wfldp
