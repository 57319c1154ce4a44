#include <doctest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "wfldp/action_minimizer.hpp"
#include "wfldp/path_action.hpp"
#include "wfldp/wf_simulator.hpp"

using namespace wfldp;

namespace {

SimplexPoint sp(std::vector<double> w) { return SimplexPoint(std::move(w)); }
const FitnessMatrix kV1 = FitnessMatrix::from_rows({{1, 0}, {0, 0}});
const ModelParams kHalf(1.0, SimplexPoint({0.5, 0.5}), 0.1);

PathGrid random_path(std::mt19937_64& rng, std::size_t n, std::size_t M, double T) {
  std::vector<SimplexPoint> knots;
  for (std::size_t k = 0; k <= M; ++k) knots.push_back(sp(oracle::random_simplex(rng, n, 0.3)));
  std::vector<double> times(M + 1);
  for (std::size_t k = 0; k <= M; ++k) times[k] = T * k / M;
  return PathGrid(times, knots);
}

FitnessMatrix random_fitness(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> nd;
  std::vector<std::vector<double>> rows(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) rows[i][j] = rows[j][i] = nd(rng);
  return FitnessMatrix::from_rows(rows);
}

// Knots 0, 1/32 of each dyadic gap toward t = 1, down to 1 - 2^-levels.
std::vector<double> graded_times(unsigned levels) {
  std::vector<double> t = {0.0};
  for (unsigned j = 1; j <= levels; ++j) {
    const double a = 1 - std::ldexp(1.0, -(int)j + 1), b = 1 - std::ldexp(1.0, -(int)j);
    for (int s = 1; s <= 32; ++s) t.push_back(a + (b - a) * s / 32);
  }
  return t;
}

PathGrid smooth_path(std::size_t M) {
  return PathGrid::sample(1.0, M, 2, [](double t) {
    const double x = 0.5 + 0.3 * std::sin(2 * t) * std::exp(-t);
    return SimplexPoint({x, 1 - x});
  });
}

}  // namespace

TEST_CASE("flow paths cost nothing") {
  std::vector<double> times(1001);
  for (std::size_t k = 0; k <= 1000; ++k) times[k] = k * 1e-3;
  const auto flow = PathGrid::sample(1.0, 1000, 2, [](double t) {
    const auto x = oracle::linear_flow(1.0, {0.5, 0.5}, {0.9, 0.1}, t);
    return SimplexPoint(x);
  });
  CHECK(action_neutral(kHalf, flow) < 1e-6);
  for (const auto& pt : boundary_blowup_profile(kHalf, flow)) CHECK(pt.action < 1e-6);

  const auto sel = deterministic_flow(kHalf, kV1, sp({0.9, 0.1}), times, 8);
  CHECK(action_selective(kHalf, kV1, sel) < 1e-6);
  CHECK(action_neutral(kHalf, sel) > 1e-3);
}

TEST_CASE("constant path costs") {
  const PathGrid c({0.0, 0.5, 1.0}, {sp({0.8, 0.2}), sp({0.8, 0.2}), sp({0.8, 0.2})});
  CHECK(action_neutral(kHalf, c) == doctest::Approx(0.0703125).epsilon(1e-9));
  const PathGrid atp({0.0, 1.0}, {sp({0.5, 0.5}), sp({0.5, 0.5})});
  CHECK(gamma_V(kHalf, kV1, atp) == doctest::Approx(-0.03125).epsilon(1e-12));
  CHECK(gamma_V(kHalf, FitnessMatrix::zeros(2), c) == 0.0);
  std::mt19937_64 rng(1);
  const auto r = random_path(rng, 3, 20, 1.5);
  const ModelParams p3(1.0, sp({0.2, 0.3, 0.5}), 0.1);
  CHECK(std::abs(gamma_V(p3, FitnessMatrix::constant(3, 2.0), r)) < 1e-12);
  CHECK(action_selective(p3, FitnessMatrix::zeros(3), r) == action_neutral(p3, r));
}

TEST_CASE("boundary contact is infinite") {
  const PathGrid hit({0.0, 0.5, 1.0}, {sp({0.5, 0.5}), sp({0.25, 0.75}), sp({0.0, 1.0})});
  CHECK(is_infinite(action_neutral(kHalf, hit)));
  CHECK(is_infinite(action_selective(kHalf, kV1, hit)));
  const auto prof = boundary_blowup_profile(kHalf, hit);
  CHECK(std::isfinite(prof[1].action));
  CHECK(is_infinite(prof[2].action));

  const PathGrid start_on({0.0, 1.0}, {sp({1.0, 0.0}), sp({0.5, 0.5})});
  CHECK(is_infinite(action_neutral(kHalf, start_on)));

  // leaving the face of p
  const ModelParams p3(1.0, sp({0.5, 0.5, 0.0}), 0.1);
  const PathGrid leave({0.0, 1.0}, {sp({0.5, 0.5, 0.0}), sp({0.4, 0.5, 0.1})});
  CHECK(is_infinite(action_neutral(p3, leave)));
  const PathGrid stay({0.0, 1.0}, {sp({0.5, 0.5, 0.0}), sp({0.4, 0.6, 0.0})});
  CHECK(std::isfinite(action_neutral(p3, stay)));
  CHECK_THROWS(PathGrid({0.0}, {sp({0.5, 0.5})}));
}

TEST_CASE("completing the square holds node by node") {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = 2 + k % 2;
    const ModelParams params(0.5 + k * 0.02, sp(oracle::random_simplex(rng, n, 0.2)), 0.1);
    const auto V = random_fitness(rng, n);
    const auto path = random_path(rng, n, 64, 2.0);
    const double lhs = action_neutral(params, path) - gamma_V(params, V, path);
    CHECK(std::abs(lhs - action_selective(params, V, path)) < 1e-8);
  }
}

TEST_CASE("dual norm form of the action") {
  std::mt19937_64 rng(3);
  const ModelParams params(1.3, sp({0.2, 0.3, 0.5}), 0.1);
  const auto V = random_fitness(rng, 3);
  const auto path = random_path(rng, 3, 30, 1.0);
  double sum = 0;
  for (std::size_t k = 0; k < path.intervals(); ++k) {
    const double dt = path.time(k + 1) - path.time(k);
    std::vector<double> mid(3), u(3);
    for (std::size_t i = 0; i < 3; ++i) mid[i] = 0.5 * (path.knot(k)[i] + path.knot(k + 1)[i]);
    const SimplexPoint m(mid);
    const auto b = mutation_drift(params, m);
    const auto r = selection_drift(V, m);
    for (std::size_t i = 0; i < 3; ++i) u[i] = (path.knot(k + 1)[i] - path.knot(k)[i]) / dt - b[i] - r[i];
    sum += dt * dual_norm_sq(m, ZeroSumVector(u));
  }
  CHECK(sum == doctest::Approx(action_selective(params, V, path)).epsilon(1e-12));
}

TEST_CASE("refinement is second order") {
  std::vector<double> a;
  for (std::size_t M : {16u, 32u, 64u, 128u, 256u, 512u}) a.push_back(action_neutral(kHalf, smooth_path(M)));
  // errors against the next level: e_k ~ c h^q
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k + 1 < a.size(); ++k) {
    lx.push_back(std::log(1.0 / (16 << k)));
    ly.push_back(std::log(std::abs(a[k] - a[k + 1])));
  }
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    mx += lx[k] / lx.size();
    my += ly[k] / ly.size();
  }
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sxy += (lx[k] - mx) * (ly[k] - my);
    sxx += (lx[k] - mx) * (lx[k] - mx);
  }
  CHECK(sxy / sxx >= 1.9);
}

TEST_CASE("boundary-term form of the Girsanov functional") {
  // On piecewise-linear paths with midpoint states the two forms agree exactly.
  for (std::size_t M : {8u, 64u, 128u}) {
    CHECK(std::abs(gamma_V(kHalf, kV1, smooth_path(M)) - gamma_V_boundary_form(kHalf, kV1, smooth_path(M))) < 1e-14);
  }
  std::mt19937_64 rng(4);
  const ModelParams p3(1.0, sp({0.2, 0.3, 0.5}), 0.1);
  const auto V = random_fitness(rng, 3);
  const auto path = random_path(rng, 3, 40, 2.0);
  CHECK(gamma_V(p3, V, path) == doctest::Approx(gamma_V_boundary_form(p3, V, path)).epsilon(1e-12));
}

TEST_CASE("truncation is monotone") {
  std::mt19937_64 rng(8);
  const auto path = random_path(rng, 3, 50, 1.0);
  const auto prof = boundary_blowup_profile(ModelParams(1.0, sp({0.3, 0.3, 0.4}), 0.1), path);
  REQUIRE(prof.size() == 51);
  CHECK(prof[0].action == 0.0);
  for (std::size_t k = 1; k < prof.size(); ++k) CHECK(prof[k].action >= prof[k - 1].action);
  CHECK(prof.back().action == doctest::Approx(action_neutral(ModelParams(1.0, sp({0.3, 0.3, 0.4}), 0.1), path)));
}

TEST_CASE("linear path into the boundary diverges logarithmically") {
  const unsigned levels = 20;
  const auto times = graded_times(levels);
  std::vector<SimplexPoint> knots;
  for (double t : times) knots.push_back(sp({0.5 * (1 - t), 0.5 * (1 + t)}));
  const auto prof = boundary_blowup_profile(kHalf, PathGrid(times, knots));
  for (unsigned k = 1; k <= levels; ++k) {
    const auto& pt = prof[32 * k];
    CHECK(pt.t == doctest::Approx(1 - std::ldexp(1.0, -(int)k)));
    CHECK(pt.action == doctest::Approx(double(oracle::linear_boundary_action(pt.t))).epsilon(1e-3));
  }
  // slope 9/16 per unit of log(1/(1-t))
  const double slope = (prof[32 * 20].action - prof[32 * 10].action) / (10 * std::log(2.0));
  CHECK(slope == doctest::Approx(0.5625).epsilon(1e-3));

  // uniform dt = 2^-k / 32 agrees with the graded grid
  const unsigned k = 8;
  const std::size_t M = 32u << k;
  const auto uni = PathGrid::sample(1.0, M, 2, [](double t) { return SimplexPoint({0.5 * (1 - t), 0.5 * (1 + t)}); });
  const auto up = boundary_blowup_profile(kHalf, uni);
  CHECK(up[M - 32].action == doctest::Approx(prof[32 * k].action).epsilon(1e-3));
  CHECK(is_infinite(up.back().action));
}

TEST_CASE("gradients match central differences") {
  std::mt19937_64 rng(6);
  const ModelParams params(1.0, sp({0.2, 0.3, 0.5}), 0.1);
  const auto V = random_fitness(rng, 3);
  const auto path = random_path(rng, 3, 12, 1.0);
  const auto& x = path.data();
  std::vector<double> grad(x.size());
  detail::midpoint_action(params.theta(), params.p().weights(), &V, path.times(), 3, x, grad);
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double h = 1e-6;
    auto up = x, dn = x;
    up[j] += h;
    dn[j] -= h;
    const double fd = (detail::midpoint_action(params.theta(), params.p().weights(), &V, path.times(), 3, up) -
                       detail::midpoint_action(params.theta(), params.p().weights(), &V, path.times(), 3, dn)) /
                      (2 * h);
    CHECK(std::abs(grad[j] - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
  }

  // chart gradient of the minimizer's objective
  const auto cg = action_gradient(params, V, path);
  const KnotChart chart(params.p());
  REQUIRE(cg.size() == 11);
  for (std::size_t k = 1; k < 12; ++k) {
    std::vector<double> z(2);
    chart.encode(path.knot(k), z);
    for (std::size_t c = 0; c < 2; ++c) {
      auto eval = [&](double shift) {
        auto zz = z;
        zz[c] += shift;
        auto knots = x;
        chart.decode(zz, std::span<double>(knots.data() + 3 * k, 3));
        return action_selective(params, V, PathGrid(path.times(), 3, knots));
      };
      const double fd = (eval(1e-6) - eval(-1e-6)) / 2e-6;
      CHECK(std::abs(cg[k - 1][c] - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("path csv round trip") {
  std::mt19937_64 rng(10);
  const auto path = random_path(rng, 4, 7, 0.7);
  std::stringstream ss;
  write_path_csv(ss, path);
  CHECK(ss.str().rfind("t,x_1,x_2,x_3,x_4\n", 0) == 0);
  CHECK(read_path_csv(ss) == path);
  const auto again = PathGrid(path.times(), 4, path.data());
  CHECK(again == path);
  std::stringstream bad("t,y_1,x_2\n0,0.5,0.5\n");
  CHECK_THROWS(read_path_csv(bad));
}
