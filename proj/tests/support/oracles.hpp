#pragma once

// Reference values computed without the library: Bessel series, closed forms,
// brute-force sums and Eigen's dense eigensolver.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ruelle/potential.hpp"
#include "ruelle/transfer.hpp"

namespace oracle {

/// Modified Bessel I_nu(x), integer nu, by its power series.
inline double bessel_i(int nu, double x) {
  long double term = 1.0L;
  for (int k = 1; k <= nu; ++k) term *= static_cast<long double>(x) / 2.0L / k;
  long double sum = term;
  const long double q = static_cast<long double>(x) * x / 4.0L;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<long double>(k) * (k + nu));
    sum += term;
    if (term < sum * 1e-21L) break;
  }
  return static_cast<double>(sum);
}

/// sinh(b) / b and coth(b) - 1/b in extended precision.
inline double sinhc(double b) {
  if (b == 0.0) return 1.0;
  const long double lb = b;
  return static_cast<double>(std::sinh(lb) / lb);
}
inline double langevin(double b) {
  if (b == 0.0) return 0.0;
  const long double lb = b;
  if (std::abs(b) < 1e-3) return static_cast<double>(lb / 3 - lb * lb * lb / 45 + 2 * std::pow(lb, 5) / 945);
  return static_cast<double>(std::cosh(lb) / std::sinh(lb) - 1.0L / lb);
}

struct Spectrum {
  double lambda = 0.0;
  double second = 0.0;  // second largest modulus
};

/// Moduli of the two leading eigenvalues of a dense row-major matrix.
inline Spectrum dense_spectrum(const std::vector<double>& m, std::size_t n) {
  Eigen::MatrixXd a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m[i * n + j];
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  std::vector<double> mods;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) mods.push_back(std::abs(es.eigenvalues()(i)));
  std::sort(mods.rbegin(), mods.rend());
  return {mods[0], mods.size() > 1 ? mods[1] : 0.0};
}

/// Dense matrix of the operator built directly from the definition
/// (L phi)(x) = sum_a w_a e^{f(a x)} phi(a x_1..x_{m-1}).
inline std::vector<double> dense_operator(const ruelle::Potential& f, int m) {
  const std::size_t n = f.alphabet->size();
  std::size_t size = 1;
  for (int i = 0; i < m; ++i) size *= n;
  std::vector<double> out(size * size, 0.0);
  std::vector<std::size_t> x(static_cast<std::size_t>(m)), y(static_cast<std::size_t>(m + 1));
  for (std::size_t xi = 0; xi < size; ++xi) {
    std::size_t r = xi;
    for (int j = m - 1; j >= 0; --j) {
      x[static_cast<std::size_t>(j)] = r % n;
      r /= n;
    }
    for (std::size_t a = 0; a < n; ++a) {
      y[0] = a;
      for (int j = 0; j < m; ++j) y[static_cast<std::size_t>(j + 1)] = x[static_cast<std::size_t>(j)];
      std::vector<std::size_t> args(y.begin(), y.begin() + f.depth);
      const double k = f.alphabet->weight(a) * std::exp(f.eval(args));
      std::size_t target = 0;
      for (int j = 0; j < m; ++j) target = target * n + y[static_cast<std::size_t>(j)];
      out[xi * size + target] += k;
    }
  }
  return out;
}

inline std::vector<double> random_values(std::size_t count, double scale, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> v(count);
  for (auto& x : v) x = u(gen);
  return v;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("ruelle_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace oracle
