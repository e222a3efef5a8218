#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "ruelle/errors.hpp"
#include "ruelle/heisenberg.hpp"

using namespace ruelle;

TEST_CASE("langevin function") {
  for (double b : {1e-6, 1e-5, 5e-5, 1e-4, 2e-4, 0.1, 1.0, 10.0, 50.0}) CHECK(langevin(b) == doctest::Approx(oracle::langevin(b)).epsilon(1e-12));
  CHECK(langevin(0.0) == 0.0);
}

TEST_CASE("kernel samples are unit vectors with the Langevin mean") {
  const Vec3 s = {0.6, 0.0, 0.8};
  for (double beta : {0.0, 0.5, 3.0, 40.0}) {
    Rng rng(17);
    double sum = 0, sum_sq = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const Vec3 t = sample_kernel(s, beta, rng);
      CHECK(std::abs(norm(t) - 1.0) < 1e-14);
      const double c = dot(s, t);
      sum += c;
      sum_sq += c * c;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum_sq / n - mean * mean) / n);
    CHECK(std::abs(mean - oracle::langevin(beta)) < 4 * se);
  }
  Rng rng(1);
  CHECK_THROWS_AS(sample_kernel(s, -1.0, rng), InvalidArgument);
}

TEST_CASE("kernel azimuth is uniform around the axis") {
  Rng rng(3);
  const Vec3 s{0, 0, 1};
  double cx = 0, cy = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const Vec3 t = sample_kernel(s, 1.0, rng);
    cx += t.x;
    cy += t.y;
  }
  CHECK(std::abs(cx / n) < 4 * std::sqrt(0.5 / n));
  CHECK(std::abs(cy / n) < 4 * std::sqrt(0.5 / n));
}

TEST_CASE("chain correlations are powers of the Langevin function") {
  Rng rng(5);
  const double beta = 1.5;
  const int n_draws = 100000;
  std::vector<double> sum(4, 0.0), sum_sq(4, 0.0);
  for (int i = 0; i < n_draws; ++i) {
    const auto c = sample_chain(beta, 2, rng);
    for (int n = 1; n <= 4; ++n) {
      const double v = dot(c.at(-2), c.at(-2 + n));
      sum[static_cast<std::size_t>(n - 1)] += v;
      sum_sq[static_cast<std::size_t>(n - 1)] += v * v;
    }
  }
  for (int n = 1; n <= 4; ++n) {
    const double m = sum[static_cast<std::size_t>(n - 1)] / n_draws;
    const double se = std::sqrt((sum_sq[static_cast<std::size_t>(n - 1)] / n_draws - m * m) / n_draws);
    CHECK(std::abs(m - std::pow(oracle::langevin(beta), n)) < 4 * se);
  }
}

TEST_CASE("heat-bath conditional density is normalized") {
  Rng rng(2);
  auto st = make_ladder_state(3, 2, 1.3, 0.7, rng);
  const auto sphere = make_sphere_alphabet(24, 48);
  for (auto [row, col] : {std::pair{0, -2}, std::pair{1, 0}, std::pair{2, 1}}) {
    double total = 0.0;
    for (std::size_t i = 0; i < sphere->size(); ++i) {
      const auto p = sphere->node(i);
      total += sphere->weight(i) * std::exp(heat_bath_log_density(st, row, col, {p[0], p[1], p[2]}));
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("ladder log-weight by hand and rotation invariance") {
  Rng rng(9);
  auto st = make_ladder_state(2, 1, 0.5, 1.0, rng);
  double expected = 0.0;
  for (int i = 0; i < 2; ++i) expected += 0.5 * (dot(st.at(i, -1), st.at(i, 0)) + dot(st.at(i, 0), st.at(i, 1)));
  for (int n = -1; n <= 1; ++n) expected += 0.5 * std::exp(-std::abs(n)) * dot(st.at(0, n), st.at(1, n));
  CHECK(ladder_log_weight(st) == doctest::Approx(expected).epsilon(1e-14));
  const auto r = Rotation::axis_angle({1, 2, 3}, 0.77);
  CHECK(ladder_log_weight(rotated(st, r)) == doctest::Approx(expected).epsilon(1e-13));
  // the local field is the gradient of the log-weight in the site spin
  const Vec3 h = local_field(st, 1, 0);
  const Vec3 h_ref = 0.5 * (st.at(1, -1) + st.at(1, 1)) + 0.5 * st.at(0, 0);
  CHECK(norm(h - h_ref) < 1e-14);
}

TEST_CASE("heat bath samples a two-spin Gibbs measure") {
  // rows = 2, W = 0: two spins coupled by beta; E[s1.s2] = L(beta).
  Rng rng(12);
  auto st = make_ladder_state(2, 0, 1.2, 1.0, rng);
  ladder_heat_bath(st, 1000, rng);
  std::vector<double> series;
  for (int t = 0; t < 100000; ++t) {
    ladder_heat_bath(st, 1, rng);
    series.push_back(dot(st.at(0, 0), st.at(1, 0)));
  }
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(series.size());
  double var = 0.0;
  for (double v : series) var += (v - mean) * (v - mean);
  var /= static_cast<double>(series.size());
  const double tau = integrated_autocorrelation_time(series);
  const double se = std::sqrt(var * 2 * tau / static_cast<double>(series.size()));
  CHECK(std::abs(mean - oracle::langevin(1.2)) < 4 * se);
}

TEST_CASE("autocorrelation time of an AR(1) series") {
  Rng rng(8);
  const double rho = 0.8;
  std::vector<double> x(400000);
  double v = 0.0;
  for (auto& xi : x) {
    const double g = std::sqrt(-2 * std::log(1 - rng.uniform())) * std::cos(2 * std::numbers::pi * rng.uniform());
    v = rho * v + g;
    xi = v;
  }
  const double expected = 0.5 * (1 + rho) / (1 - rho);
  CHECK(integrated_autocorrelation_time(x) == doctest::Approx(expected).epsilon(0.05));
  std::vector<double> iid(100000);
  for (auto& y : iid) y = rng.uniform();
  CHECK(integrated_autocorrelation_time(iid) == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("run_ladder is deterministic and two_point guards its sample size") {
  Rng rng(1);
  const auto st = make_ladder_state(4, 1, 0.5, 1.0, rng);
  LadderRunOptions o{.burn_in = 100, .sweeps = 3000, .measure_every = 2, .column = 0, .n_max = 3, .chains = 2, .seed = 4};
  const auto a = run_ladder(st, o);
  const auto b = run_ladder(st, o);
  REQUIRE(a.chains.size() == 2);
  CHECK(a.chains[1].g[2] == b.chains[1].g[2]);
  CHECK(a.chains[0].g[0] != a.chains[1].g[0]);
  const auto tp = two_point(a);
  CHECK(tp.g[0] == 1.0);
  CHECK(tp.samples == 3000);
  o.sweeps = 40;
  CHECK_THROWS_AS(two_point(run_ladder(st, o)), InsufficientData);
  o.n_max = 4;
  CHECK_THROWS_AS(run_ladder(st, o), InvalidArgument);
}

TEST_CASE("W = 0 operator cross-check reproduces the free chain") {
  for (double beta : {0.5, 1.0}) {
    const auto r = ladder_operator_crosscheck(beta, 1.0, 0, make_sphere_alphabet(16, 32));
    CHECK(r.pressure == doctest::Approx(std::log(oracle::sinhc(beta))).epsilon(1e-9));
    CHECK(r.gap_ratio == doctest::Approx(oracle::langevin(beta)).epsilon(1e-7));
    CHECK(r.log_partition == 0.0);
  }
  CHECK_THROWS_AS(ladder_operator_crosscheck(1.0, 1.0, 2, make_octahedral_alphabet()), InvalidArgument);
}
