#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "wfldp/dirichlet_equilibrium.hpp"
#include "wfldp/parallel.hpp"

using namespace wfldp;

namespace {

SimplexPoint sp(std::vector<double> w) { return SimplexPoint(std::move(w)); }
const FitnessMatrix kV1 = FitnessMatrix::from_rows({{1, 0}, {0, 0}});
const std::vector<double> kGammas = {0.1, 0.05, 0.02, 0.01};

std::vector<double> first_coords(const SampleBatch& b) {
  std::vector<double> xs;
  for (const auto& x : b.points) xs.push_back(x[0]);
  return xs;
}

}  // namespace

TEST_CASE("uniform marginal passes Kolmogorov-Smirnov") {
  const ModelParams params(1.0, sp({0.5, 0.5}), 0.5);
  const auto batch = dirichlet_sample(params, 100000, 17);
  const auto ks = oracle::ks_test(first_coords(batch), [](double x) { return x; });
  CHECK(ks.p_value > 1e-3);
  CHECK(ks.statistic < 1.949 / std::sqrt(1e5));
}

TEST_CASE("shape below one passes Kolmogorov-Smirnov") {
  // Beta(0.25, 0.75), mass piled at both ends
  const ModelParams params(1.0, sp({0.25, 0.75}), 1.0);
  const auto batch = dirichlet_sample(params, 20000, 3);
  const auto ks = oracle::ks_test(first_coords(batch), [](double x) {
    return static_cast<double>(oracle::incomplete_beta(0.25L, 0.75L, x));
  });
  CHECK(ks.p_value > 1e-3);
}

TEST_CASE("sample means sit on p") {
  for (const auto& [p, gamma] : std::vector<std::pair<std::vector<double>, double>>{
           {{0.5, 0.5}, 0.5}, {{0.2, 0.3, 0.5}, 0.1}, {{0.1, 0.2, 0.3, 0.4}, 2.0}, {{0.6, 0.4}, 0.01}}) {
    const ModelParams params(1.3, sp(p), gamma);
    const std::size_t n = 50000;
    const auto batch = dirichlet_sample(params, n, 99);
    const double a0 = 1.3 / gamma;
    for (std::size_t i = 0; i < p.size(); ++i) {
      double s = 0;
      for (const auto& x : batch.points) s += x[i];
      const double se = std::sqrt(p[i] * (1 - p[i]) / (a0 + 1) / n);
      CHECK(std::abs(s / n - p[i]) < 4 * se);
    }
  }
  // n = 2 mean by quadrature
  const ModelParams params(1.0, sp({0.3, 0.7}), 0.2);
  CHECK(exact_expectation_n2(params, std::nullopt, [](double x) { return x; }) == doctest::Approx(0.3).epsilon(1e-10));
}

TEST_CASE("degenerate p gives exact zeros") {
  const ModelParams p10(1.0, sp({1.0, 0.0}), 0.3);
  for (const auto& x : dirichlet_sample(p10, 1000, 1).points) {
    CHECK(x[0] == 1.0);
    CHECK(x[1] == 0.0);
  }
  const ModelParams p3(1.0, sp({0.4, 0.0, 0.6}), 0.3);
  for (const auto& x : dirichlet_sample(p3, 1000, 1).points) {
    CHECK(x[1] == 0.0);
    CHECK(x.absolutely_continuous_wrt(p3.p()));
  }
}

TEST_CASE("sampler is deterministic and independent of threads") {
  const ModelParams params(1.0, sp({0.2, 0.3, 0.5}), 0.05);
  set_num_threads(1);
  const auto a = dirichlet_sample(params, 5000, 1234);
  set_num_threads(3);
  const auto b = dirichlet_sample(params, 5000, 1234);
  set_num_threads(0);
  CHECK(a.points == b.points);
  CHECK(dirichlet_sample(params, 10, 1).points != dirichlet_sample(params, 10, 2).points);
}

TEST_CASE("log density examples") {
  CHECK(dirichlet_log_density(ModelParams(1.0, sp({0.5, 0.5}), 0.5), sp({0.3, 0.7})) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(dirichlet_log_density(ModelParams(1.0, sp({0.5, 0.5}), 0.25), sp({0.5, 0.5})) ==
        doctest::Approx(std::log(1.5)).epsilon(1e-12));
  CHECK(dirichlet_log_density(ModelParams(1.0, sp({0.5, 0.5}), 0.25), sp({1.0, 0.0})) ==
        -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(dirichlet_log_density(ModelParams(1.0, sp({1.0, 0.0}), 0.25), sp({1.0, 0.0})), DomainError);

  const ModelParams params(1.0, sp({0.3, 0.7}), 0.1);
  const double lz = static_cast<double>(oracle::log_tanh_sinh(
      [&](oracle::ld x, oracle::ld, oracle::ld) {
        return static_cast<oracle::ld>(dirichlet_log_density(params, sp({double(x), 1 - double(x)})));
      },
      0.0L, 1.0L, 1e-12L));
  CHECK(std::abs(std::exp(lz) - 1) < 1e-6);
}

TEST_CASE("exact event probabilities") {
  const ModelParams uni(1.0, sp({0.5, 0.5}), 0.5);
  CHECK(exact_event_prob(uni, EventBox::whole(2)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(exact_event_prob(uni, EventBox({0.8, 0.0}, {1.0, 1.0})) == doctest::Approx(0.2).epsilon(1e-10));
  CHECK(exact_event_prob(uni, EventBox::whole(2), kV1) == doctest::Approx(1.0).epsilon(1e-12));

  const ModelParams params(1.0, sp({0.5, 0.5}), 0.05);
  const EventBox box({0.8, 0.0}, {1.0, 1.0});
  CHECK(exact_event_prob(params, box, FitnessMatrix::constant(2, 3.0)) ==
        doctest::Approx(exact_event_prob(params, box)).epsilon(1e-10));

  for (double gamma : kGammas) {
    const ModelParams pg = params.with_gamma(gamma);
    const double a = 0.5 / gamma;
    CHECK(exact_event_log_prob(pg, box) == doctest::Approx(double(oracle::log_beta_prob(a, a, 0.8L, 1.0L))).epsilon(1e-10));
    const double tilted = double(oracle::log_beta_prob(a, a, 0.8L, 1.0L, [&](oracle::ld x) { return x * x / gamma; }));
    CHECK(exact_event_log_prob(pg, box, kV1) == doctest::Approx(tilted).epsilon(1e-9));
  }
  CHECK_THROWS_AS(exact_event_prob(ModelParams(1.0, SimplexPoint::uniform(4), 0.1), EventBox::whole(4)), DimensionError);
}

TEST_CASE("three-type event probability against nested oracle quadrature") {
  const ModelParams params(1.0, sp({0.2, 0.3, 0.5}), 0.2);
  const EventBox box({0.1, 0.0, 0.2}, {0.5, 0.4, 1.0});
  const oracle::ld a0 = 1.0L, a1 = 1.5L, a2 = 2.5L;
  // x0 outer, x1 = (1 - x0) s inner
  const oracle::ld lnorm = std::lgamma(a0 + a1 + a2) - std::lgamma(a0) - std::lgamma(a1) - std::lgamma(a2);
  auto outer = [&](oracle::ld x0, oracle::ld, oracle::ld) -> oracle::ld {
        const oracle::ld rest = 1 - x0;
        oracle::ld lo = 0.0L, hi = std::min<oracle::ld>(0.4L, rest);
        lo = std::max(lo, rest - 1.0L);
        hi = std::min(hi, rest - 0.2L);
        if (!(hi > lo)) return -std::numeric_limits<oracle::ld>::infinity();
        const oracle::ld inner = oracle::log_tanh_sinh(
            [&](oracle::ld x1, oracle::ld, oracle::ld) {
              const oracle::ld x2 = rest - x1;
              return (a1 - 1) * std::log(x1) + (a2 - 1) * std::log(x2);
            },
            lo, hi, 1e-13L);
        return lnorm + (a0 - 1) * std::log(x0) + inner;
  };
  // the inner upper limit has a kink at x0 = 0.4
  const double want = std::exp(double(oracle::log_tanh_sinh(outer, 0.1L, 0.4L, 1e-12L))) +
                      std::exp(double(oracle::log_tanh_sinh(outer, 0.4L, 0.5L, 1e-12L)));
  CHECK(std::abs(exact_event_prob(params, box) - want) < 1e-7);
}

TEST_CASE("event probabilities match sample frequencies") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  const ModelParams params(1.0, sp({0.4, 0.6}), 0.1);
  const std::size_t n = 100000;
  const auto batch = dirichlet_sample(params, n, 55);
  for (int k = 0; k < 10; ++k) {
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    const EventBox box({a, 0.0}, {b, 1.0});
    double hits = 0;
    for (const auto& x : batch.points) hits += box.contains(x);
    const auto w = wilson_interval(hits, n);
    const double half = 0.5 * (w.high - w.low);
    CHECK(std::abs(exact_event_prob(params, box) - hits / n) < 4 * half + 1e-12);
  }
}

TEST_CASE("tilted sampler") {
  const ModelParams params(1.0, sp({0.5, 0.5}), 0.2);
  const auto flat = tilted_sample(params, FitnessMatrix::zeros(2), 1000, 4);
  for (double w : flat.weights) CHECK(w == doctest::Approx(flat.weights.front()));

  const std::size_t n = 40000;
  const auto batch = tilted_sample(params, kV1, n, 4);
  double sw = 0, m = 0;
  for (std::size_t k = 0; k < n; ++k) {
    sw += batch.weights[k];
    m += batch.weights[k] * batch.points[k][0];
  }
  m /= sw;
  double var = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double w = batch.weights[k] / sw;
    var += w * w * (batch.points[k][0] - m) * (batch.points[k][0] - m);
  }
  const double exact = exact_expectation_n2(params, kV1, [](double x) { return x; });
  CHECK(std::abs(m - exact) < 3 * std::sqrt(var));
  CHECK(batch.ess > 0.0);
  CHECK(batch.ess <= n);
}

TEST_CASE("tilt consistency over growing sample counts") {
  const ModelParams params(1.0, sp({0.5, 0.5}), 0.1);
  auto g = [](double x) { return x > 0.7 ? 1.0 : 0.0; };
  const double exact = exact_expectation_n2(params, kV1, g);
  for (std::size_t n : {2000u, 20000u, 100000u}) {
    const auto batch = tilted_sample(params, kV1, n, 12);
    double sw = 0, m = 0;
    for (std::size_t k = 0; k < n; ++k) {
      sw += batch.weights[k];
      m += batch.weights[k] * g(batch.points[k][0]);
    }
    m /= sw;
    double var = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const double w = batch.weights[k] / sw;
      var += w * w * (g(batch.points[k][0]) - m) * (g(batch.points[k][0]) - m);
    }
    CHECK(std::abs(m - exact) < 3 * std::sqrt(var) + 1e-12);
  }
}

TEST_CASE("halving gamma does not raise the ESS") {
  int not_larger = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const double e1 = tilted_sample(ModelParams(1.0, sp({0.5, 0.5}), 0.2), kV1, 2000, seed).ess;
    const double e2 = tilted_sample(ModelParams(1.0, sp({0.5, 0.5}), 0.1), kV1, 2000, seed).ess;
    not_larger += e2 <= e1;
  }
  CHECK(not_larger >= 18);
}

TEST_CASE("weight degeneracy warns") {
  const auto batch = tilted_sample(ModelParams(1.0, sp({0.5, 0.5}), 0.002),
                                   FitnessMatrix::from_rows({{20, 0}, {0, 0}}), 1000, 1);
  CHECK(batch.warning.has_value());
}

TEST_CASE("ldp scan rows") {
  const ModelParams params(1.0, sp({0.5, 0.5}), 1.0);
  const auto whole = ldp_scan(params, EventBox::whole(2), kGammas, std::nullopt, {});
  REQUIRE(whole.size() == 4);
  for (const auto& r : whole) CHECK(std::abs(r.scaled_log_prob) < 1e-12);

  const EventBox box({0.8, 0.0}, {1.0, 1.0});
  const auto rows = ldp_scan(params, box, kGammas, std::nullopt, {});
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const double a = 0.5 / kGammas[k];
    CHECK(rows[k].gamma == kGammas[k]);
    CHECK(rows[k].scaled_log_prob ==
          doctest::Approx(kGammas[k] * double(oracle::log_beta_prob(a, a, 0.8L, 1.0L))).epsilon(1e-10));
    if (k > 0) CHECK(std::abs(rows[k].scaled_log_prob + 0.2231435513) < std::abs(rows[k - 1].scaled_log_prob + 0.2231435513));
  }
  CHECK(std::abs(richardson_limit(rows) / -0.2231435513 - 1) < 0.1);
  CHECK_THROWS(ldp_scan(params, box, {}, std::nullopt, {}));
  CHECK_THROWS(ldp_scan(params, box, {0.01, 0.1}, std::nullopt, {}));
}

TEST_CASE("monte carlo scan agrees with the exact value") {
  const ModelParams params(1.0, sp({0.5, 0.5}), 1.0);
  const EventBox box({0.7, 0.0}, {1.0, 1.0});
  ScanOptions opt;
  opt.mode = ScanMode::MonteCarlo;
  opt.samples = 50000;
  opt.seed = 77;
  const auto rows = ldp_scan(params, box, {0.2, 0.1}, std::nullopt, opt);
  for (const auto& r : rows) {
    const double exact = std::exp(exact_event_log_prob(params.with_gamma(r.gamma), box));
    const double phat = r.hits / r.samples;
    CHECK(std::abs(phat - exact) < 4 * std::sqrt(exact * (1 - exact) / r.samples));
    CHECK(r.ci_low < r.scaled_log_prob);
    CHECK(r.scaled_log_prob < r.ci_high);
    CHECK_FALSE(r.zero_hit);
  }
  // far tail: no hits, upper bound reported
  const auto tail = ldp_scan(params, EventBox({0.99, 0.0}, {1.0, 1.0}), {0.01}, std::nullopt, opt);
  CHECK(tail[0].zero_hit);
  CHECK(std::isfinite(tail[0].scaled_log_prob));
  CHECK(tail[0].ci_high == tail[0].scaled_log_prob);
}

TEST_CASE("richardson recovers a planted limit") {
  std::vector<ScanRow> rows;
  for (double g : kGammas) rows.push_back({g, -0.3 + 0.7 * g * std::log(1 / g) - 1.1 * g});
  CHECK(richardson_limit(rows) == doctest::Approx(-0.3).epsilon(1e-10));
}

TEST_CASE("box infima") {
  const ModelParams params(1.0, sp({0.5, 0.5}), 0.1);
  const EventBox box({0.8, 0.0}, {1.0, 1.0});
  const auto neutral = box_rate_infimum(params, box, std::nullopt);
  CHECK(neutral.closure == doctest::Approx(0.2231435513142098).epsilon(1e-8));
  CHECK(neutral.interior == doctest::Approx(neutral.closure).epsilon(1e-8));

  const oracle::ld c = oracle::grid_C_n2(1.0L, 0.5L);
  oracle::ld best = std::numeric_limits<oracle::ld>::infinity();
  for (long k = 800000; k < 1000000; ++k) {
    const oracle::ld x = k * 1e-6L;
    best = std::min(best, c - x * x + oracle::entropy({0.5L, 0.5L}, {x, 1 - x}));
  }
  const auto sel = box_rate_infimum(params, box, kV1);
  CHECK(std::abs(sel.closure - double(best)) < 1e-7);
}

TEST_CASE("wilson interval") {
  const auto w = wilson_interval(50, 100);
  CHECK(w.low == doctest::Approx(0.4038).epsilon(1e-3));
  CHECK(w.high == doctest::Approx(0.5962).epsilon(1e-3));
  const auto z = wilson_interval(0, 1000);
  CHECK(z.low < 1e-15);
  CHECK(z.high > 0.0);
}
