#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "ruelle/correlation.hpp"
#include "ruelle/errors.hpp"

using namespace ruelle;

TEST_CASE("circle XY correlations are half a power of the Bessel ratio") {
  const auto c = make_circle_alphabet(64);
  const TransferOperator op(dot_coupling_potential(c, 1.0));
  const auto eig = power_iteration(op);
  const auto phi = grid_function(op.grid(), coordinate_observable(c, 1, 0));
  const auto series = correlation_series(op, eig, phi, phi, 30);
  const double tau = oracle::bessel_i(1, 1.0) / oracle::bessel_i(0, 1.0);
  for (int n = 0; n <= 30; ++n) CHECK(std::abs(series[static_cast<std::size_t>(n)] - 0.5 * std::pow(tau, n)) < 1e-10);
  CHECK(correlation(op, eig, phi, phi, 7) == doctest::Approx(series[7]).epsilon(1e-12));
  const auto fit = decay_fit(series);
  CHECK(std::abs(fit.tau - tau) < 1e-6);
  for (std::size_t n = kFitSkip; n < series.size(); ++n) CHECK(std::abs(series[n]) <= fit.K * std::pow(fit.tau, n) * (1 + 1e-12));
}

TEST_CASE("constant observables are uncorrelated") {
  const auto c = make_circle_alphabet(32);
  const TransferOperator op(dot_coupling_potential(c, 2.0));
  const auto eig = power_iteration(op);
  const auto phi = grid_function(op.grid(), coordinate_observable(c, 1, 1));
  const GridFunction one(op.grid(), 1.0);
  for (double v : correlation_series(op, eig, phi, one, 20)) CHECK(std::abs(v) < 1e-12);
  CHECK_THROWS_AS(decay_fit(correlation_series(op, eig, phi, one, 20)), InsufficientData);
}

TEST_CASE("spectral correlations agree with dense matrix powers") {
  const auto a = make_finite_alphabet(3);
  const auto f = table_potential(a, 2, oracle::random_values(9, 1.0, 5));
  const TransferOperator op(f);
  const auto eig = power_iteration(op);
  const GridFunction phi(op.grid(), oracle::random_values(3, 1.0, 6));
  const GridFunction psi(op.grid(), oracle::random_values(3, 1.0, 7));
  const auto m = oracle::dense_operator(f, 1);
  std::vector<double> u(3);
  for (std::size_t i = 0; i < 3; ++i) u[i] = psi.values[i] * eig.h.values[i];
  const auto series = correlation_series(op, eig, phi, psi, 10);
  double mphi = 0, mpsi = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    mphi += eig.nu[i] * phi.values[i] * eig.h.values[i];
    mpsi += eig.nu[i] * psi.values[i] * eig.h.values[i];
  }
  for (int n = 0; n <= 10; ++n) {
    double s = 0.0;
    for (std::size_t i = 0; i < 3; ++i) s += eig.nu[i] * phi.values[i] * u[i];
    CHECK(series[static_cast<std::size_t>(n)] == doctest::Approx(s - mphi * mpsi).epsilon(1e-9).scale(1e-12));
    std::vector<double> next(3, 0.0);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) next[i] += m[i * 3 + j] * u[j] / eig.lambda;
    u = next;
  }
}

TEST_CASE("decay fit needs five usable points") {
  const std::vector<double> s{1, 0.5, 0.25, 0.125, 0.0625, 0.03125};
  CHECK_THROWS_AS(decay_fit(s), InsufficientData);
  std::vector<double> g;
  for (int n = 0; n < 20; ++n) g.push_back(3.0 * std::pow(0.6, n));
  const auto fit = decay_fit(g);
  CHECK(fit.tau == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(fit.K == doctest::Approx(3.0).epsilon(1e-10));
}
