#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "ruelle/errors.hpp"
#include "ruelle/potential.hpp"
#include "ruelle/rng.hpp"

using namespace ruelle;

namespace {

double theta(const Alphabet& a, std::size_t i) { return std::atan2(a.node(i)[1], a.node(i)[0]); }

}  // namespace

TEST_CASE("dot coupling on the circle is beta cos(t1 - t2)") {
  const auto a = make_circle_alphabet(12);
  const auto f = dot_coupling_potential(a, 1.5);
  CHECK(f.depth == 2);
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = 0; j < 12; ++j) {
      const std::vector<std::size_t> x{i, j, 3};
      CHECK(f(x) == doctest::Approx(1.5 * std::cos(theta(*a, i) - theta(*a, j))));
    }
  CHECK_THROWS_AS(dot_coupling_potential(make_finite_alphabet(3), 1.0), InvalidArgument);
}

TEST_CASE("table potential is row-major with x1 most significant") {
  const auto a = make_finite_alphabet(3);
  std::vector<double> v(9);
  for (std::size_t i = 0; i < 9; ++i) v[i] = static_cast<double>(i);
  const auto f = table_potential(a, 2, v);
  const std::vector<std::size_t> x{2, 1};
  CHECK(f(x) == 7.0);
  CHECK_THROWS_AS(table_potential(a, 2, {1.0, 2.0}), InvalidArgument);
  v[4] = std::nan("");
  CHECK_THROWS_AS(table_potential(a, 2, v), InvalidArgument);
}

TEST_CASE("certified Hoelder constants dominate the empirical ratio") {
  const auto circle = make_circle_alphabet(16);
  const auto sphere = make_sphere_alphabet(4, 8);
  const auto finite = make_finite_alphabet(4);
  std::vector<Potential> fs = {
      dot_coupling_potential(circle, 2.0),
      dot_coupling_potential(sphere, -1.0),
      coordinate_observable(circle, 1, 0),
      coordinate_observable(circle, 3, 1),
      coordinate_coupling_potential(sphere, 2, 0.5, 1.5),
      table_potential(finite, 2, oracle::random_values(16, 1.0, 3)),
      table_potential(finite, 3, oracle::random_values(64, 2.0, 4), "t", 0.8),
  };
  for (const auto& f : fs) {
    const double observed = holder_certificate(f, 20000, 11);
    INFO(f.name);
    CHECK(observed <= f.holder_const * (1 + 1e-12));
  }
}

TEST_CASE("distance to an anchor on the circle has the 2^a diam^{1-a} bound") {
  const auto a = make_circle_alphabet(24);
  std::vector<double> v(24);
  for (std::size_t i = 0; i < 24; ++i) v[i] = a->distance(i, 0);
  const double alpha = 0.5;
  auto f = table_potential(a, 1, v, "anchor-distance", alpha);
  f.holder_const = std::pow(2.0, alpha) * std::pow(a->diameter(), 1.0 - alpha);
  CHECK(holder_certificate(f, 20000, 5) <= f.holder_const);
}

TEST_CASE("holder constant at a smaller exponent") {
  const auto f = dot_coupling_potential(make_circle_alphabet(8), 1.0);
  CHECK(f.holder_const_at(f.holder_alpha) == doctest::Approx(f.holder_const));
  CHECK(f.holder_const_at(0.25) == doctest::Approx(f.holder_const * std::pow(2.0, 0.25)));
  CHECK_THROWS_AS(f.holder_const_at(0.9), InvalidArgument);
}

TEST_CASE("combinators") {
  const auto a = make_finite_alphabet(2);
  const auto f = table_potential(a, 2, {1, 2, 3, 4});
  const auto g = table_potential(a, 1, {10, 20});
  const std::vector<std::size_t> x{1, 0};
  CHECK(scaled(f, -2)(x) == -6.0);
  CHECK(shifted(f, 0.5)(x) == 3.5);
  const auto h = linear_combination(2.0, f, 1.0, g);
  CHECK(h.depth == 2);
  CHECK(h(x) == 26.0);
  CHECK(scaled(f, -2).holder_const == doctest::Approx(2 * f.holder_const));
  CHECK_THROWS_AS(linear_combination(1, f, 1, table_potential(make_finite_alphabet(3), 1, {1, 2, 3})), InvalidArgument);
  const auto t = tabulate(g, 3);
  CHECK(t.size() == 8);
  CHECK(t[3] == 10.0);
  CHECK(t[4] == 20.0);
}

TEST_CASE("sequence metric brackets the true distance") {
  const auto a = make_circle_alphabet(8);
  const std::vector<std::size_t> x{0, 1, 2, 3};
  const std::vector<std::size_t> y{0, 1, 5, 3};
  const auto d = seq_metric(*a, x, y, 4);
  CHECK(d.value == doctest::Approx(0.125 * a->distance(2, 5)));
  CHECK(d.tail_bound == doctest::Approx(a->diameter() / 16));
}

TEST_CASE("truncating an infinite-range potential stays within the certified bound") {
  // f(x) = sum_n 2^{-n} cos(theta_n) on the circle
  const auto a = make_circle_alphabet(10);
  SequencePotential f;
  f.alphabet = a;
  f.holder_alpha = 1.0;
  f.holder_const = 2.0;  // |cos s - cos t| <= |e^{is} - e^{it}| and sum 2^{-n} d_n = d
  f.name = "geometric-cos";
  f.eval = [a](NodeIndices prefix, std::size_t tail) {
    double s = 0.0;
    double w = 1.0;
    for (std::size_t n = 0; n < 60; ++n) {
      w *= 0.5;
      s += w * a->node(n < prefix.size() ? prefix[n] : tail)[0];
    }
    return s;
  };
  for (int k : {1, 2, 4, 6}) {
    const auto [fk, report] = truncate(f, k, 3);
    double worst = 0.0;
    Rng rng(k);
    for (int s = 0; s < 2000; ++s) {
      std::vector<std::size_t> x(12);
      for (auto& xi : x) xi = rng.below(10);
      const std::size_t tail = rng.below(10);
      worst = std::max(worst, std::abs(f.eval(x, tail) - fk(x)));
    }
    CHECK(worst <= report.sup_error_bound);
    CHECK(fk.tail_error == report.sup_error_bound);
  }
  CHECK_THROWS_AS(truncate(f, 0), InvalidArgument);
}

TEST_CASE("heisenberg potential bounds") {
  const auto w = make_chain_window_alphabet(make_octahedral_alphabet(), 1, 0.5);
  const auto f = heisenberg_potential(w, 1.0);
  CHECK(f.holder_alpha == 1.0);
  CHECK(f.tail_error == doctest::Approx(2 * std::exp(-2.0) / (1 - std::exp(-1.0))));
  CHECK(holder_certificate(f, 20000, 9) <= f.holder_const);
  const auto g = heisenberg_potential(w, 0.4);
  CHECK(g.holder_alpha == 0.4);
  CHECK(holder_certificate(g, 20000, 10) <= g.holder_const);
  // node 0 is (e, e, e) for the first octahedral direction e
  const std::vector<std::size_t> x{0, 0};
  CHECK(f(x) == doctest::Approx(1 + 2 * std::exp(-1.0)));
  CHECK_THROWS_AS(heisenberg_potential(w, 0.0), InvalidArgument);
}
