#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "ruelle/thermo.hpp"

using namespace ruelle;

namespace {

Potential random_table(std::size_t n, int depth, unsigned seed, double scale = 1.0) {
  std::size_t size = 1;
  for (int i = 0; i < depth; ++i) size *= n;
  return table_potential(make_finite_alphabet(n), depth, oracle::random_values(size, scale, seed));
}

}  // namespace

TEST_CASE("single-site potential has closed-form pressure, entropy and energy") {
  // f depends on x1 only: m_f is Bernoulli with p_a = w_a e^{f(a)} / Z.
  const auto a = make_finite_alphabet(4);
  const std::vector<double> v{0.3, -1.2, 0.8, 0.0};
  const auto f = table_potential(a, 1, v);
  double z = 0.0;
  for (double x : v) z += 0.25 * std::exp(x);
  double energy = 0.0, ent = 0.0;
  for (double x : v) {
    const double p = 0.25 * std::exp(x) / z;
    energy += p * x;
    ent -= p * std::log(p / 0.25);
  }
  const TransferOperator op(f);
  const auto eig = power_iteration(op);
  const auto rep = pressure_report(op, eig, {});
  CHECK(rep.pressure == doctest::Approx(std::log(z)).epsilon(1e-13));
  CHECK(rep.energy == doctest::Approx(energy).epsilon(1e-12));
  CHECK(rep.entropy == doctest::Approx(ent).epsilon(1e-12));
}

TEST_CASE("pressure shifts with constants") {
  for (unsigned s = 0; s < 5; ++s) {
    const auto f = random_table(3, 2, s);
    for (double c : {-1.5, 0.25, 3.0}) CHECK(pressure(shifted(f, c)) == doctest::Approx(pressure(f) + c).epsilon(1e-12));
  }
}

TEST_CASE("entropy is nonpositive and vanishes at f = 0") {
  for (unsigned s = 0; s < 5; ++s) {
    const TransferOperator op(random_table(3, 3, 40 + s));
    CHECK(entropy(op, power_iteration(op)) <= 1e-13);
  }
  const TransferOperator zero(table_potential(make_finite_alphabet(3), 2, std::vector<double>(9, 0.0)));
  CHECK(std::abs(entropy(zero, power_iteration(zero))) < 1e-13);
}

TEST_CASE("finite-n pressure converges at rate 1/n") {
  const auto circle = make_circle_alphabet(64);
  const TransferOperator xy(dot_coupling_potential(circle, 1.0));
  const double p = std::log(oracle::bessel_i(0, 1.0));
  const auto dev_xy = finite_n_deviation(xy, p, {64, 2048});
  // Constant h: nothing but roundoff.
  CHECK(dev_xy[0].sup_dev < 1e-12);
  CHECK(dev_xy[1].sup_dev < 1e-3);

  const TransferOperator op(
      linear_combination(1.0, dot_coupling_potential(circle, 1.0), 0.5, coordinate_observable(circle, 1, 0)));
  const auto dev = finite_n_deviation(op, power_iteration(op).log_lambda, {64, 128, 256});
  for (int i = 0; i < 2; ++i) {
    const double r = dev[static_cast<std::size_t>(i + 1)].sup_dev / dev[static_cast<std::size_t>(i)].sup_dev;
    CHECK(r >= 0.4);
    CHECK(r <= 0.6);
  }
}

TEST_CASE("pressure is 1-Lipschitz in the sup norm") {
  for (unsigned s = 0; s < 10; ++s) {
    const auto f = random_table(3, 2, 200 + s, 2.0);
    const auto g = random_table(3, 3, 300 + s, 2.0);
    const auto check = pressure_lipschitz_check(f, g);
    CHECK(check.holds());
    for (const auto& fn : check.finite_n) CHECK(fn.lhs <= check.rhs + 1e-10);
  }
}

TEST_CASE("variational inequality") {
  for (unsigned s = 0; s < 6; ++s) {
    const auto f = random_table(3, 2, 500 + s);
    const auto g = random_table(3, 2, 600 + s);
    CHECK(variational_inequality_check(f, g) >= -1e-12);
    CHECK(std::abs(variational_inequality_check(f, f)) < 1e-11);
  }
}

TEST_CASE("equilibrium integral of depth m+1 observables") {
  // For f of depth 2 (grid depth 1), integrate f itself: through L and directly via the 2-marginal.
  const auto f = random_table(3, 2, 77);
  const TransferOperator op(f);
  const auto eig = power_iteration(op);
  const auto m = oracle::dense_operator(f, 1);
  // m_f(x1 = a, x2 = b) = nu(b) w_a e^{f(a,b)} h(a) / lambda
  double direct = 0.0;
  const auto fv = tabulate(f, 2);
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b)
      direct += eig.nu[b] * (1.0 / 3) * std::exp(fv[a * 3 + b]) * eig.h.values[a] / eig.lambda * fv[a * 3 + b];
  CHECK(equilibrium_integral(op, eig, f) == doctest::Approx(direct).epsilon(1e-12));
  (void)m;
}

TEST_CASE("entropy of the circle XY chain") {
  const TransferOperator op(dot_coupling_potential(make_circle_alphabet(64), 1.0));
  const double i0 = oracle::bessel_i(0, 1.0), i1 = oracle::bessel_i(1, 1.0);
  CHECK(entropy(op, power_iteration(op)) == doctest::Approx(std::log(i0) - i1 / i0).epsilon(1e-10));
}
