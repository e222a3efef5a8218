#include "ruelle/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ruelle/errors.hpp"

namespace ruelle {

namespace {

void require_phi_depth(const TransferOperator& op, const Potential& phi, const char* who) {
  if (phi.alphabet->size() != op.grid().node_count)
    throw InvalidArgument(std::string(who) + ": observable lives on a different alphabet");
  if (phi.depth > op.grid().depth + 1)
    throw InvalidArgument(std::string(who) + ": observable deeper than the potential");
}

}  // namespace

double pressure_derivative(const TransferOperator& op, const EigenData& eig, const Potential& phi) {
  require_phi_depth(op, phi, "pressure_derivative");
  return equilibrium_integral(op, eig, phi);
}

std::vector<FdPoint> fd_derivative(const Potential& f, const Potential& phi, const std::vector<double>& steps,
                                   const PowerIterationOptions& options) {
  std::vector<FdPoint> out;
  for (double t : steps) {
    if (!(t > 0.0)) throw InvalidArgument("fd_derivative: steps must be positive");
    const double up = pressure(linear_combination(1.0, f, t, phi), options);
    const double down = pressure(linear_combination(1.0, f, -t, phi), options);
    out.push_back({t, (up - down) / (2.0 * t)});
  }
  return out;
}

double richardson_extrapolate(const std::vector<FdPoint>& fd) {
  if (fd.empty()) throw InvalidArgument("richardson_extrapolate: no points");
  // Neville's scheme in the variable s = t^2, evaluated at s = 0.
  std::vector<double> p;
  std::vector<double> s;
  for (const auto& pt : fd) {
    p.push_back(pt.value);
    s.push_back(pt.step * pt.step);
  }
  const std::size_t n = p.size();
  for (std::size_t level = 1; level < n; ++level)
    for (std::size_t i = n - 1; i >= level; --i) {
      p[i] = (s[i - level] * p[i] - s[i] * p[i - 1]) / (s[i - level] - s[i]);
      if (i == level) break;
    }
  return p[n - 1];
}

double fitted_fd_order(const std::vector<FdPoint>& fd, double analytic) {
  const double floor = 1e-13 * std::max(1.0, std::abs(analytic));
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t count = 0;
  for (const auto& pt : fd) {
    const double err = std::abs(pt.value - analytic);
    if (err <= floor) continue;
    const double x = std::log(pt.step);
    const double y = std::log(err);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < 2) return std::numeric_limits<double>::quiet_NaN();
  const double c = static_cast<double>(count);
  return (c * sxy - sx * sy) / (c * sxx - sx * sx);
}

GridFunction birkhoff_derivative(const TransferOperator& op, const EigenData& eig, const Potential& phi, int n) {
  require_phi_depth(op, phi, "birkhoff_derivative");
  if (n < 1) throw InvalidArgument("birkhoff_derivative: n must be >= 1");
  const std::size_t size = op.grid().size;
  const auto table = op.preimage_table(phi);
  const double inv_lambda = 1.0 / eig.lambda;
  std::vector<double> u(size, 1.0);  // lambda^{-j} L^j 1
  std::vector<double> acc(size, 0.0);
  std::vector<double> tmp(size);
  std::vector<double> term(size);
  for (int j = 0; j < n; ++j) {
    // acc <- lambda^{-1} L acc + lambda^{-1} L(phi u_j)  (Horner form of the j-sum)
    op.apply(acc, tmp);
    op.apply_weighted(table, u, term);
    for (std::size_t i = 0; i < size; ++i) acc[i] = inv_lambda * (tmp[i] + term[i]);
    op.apply(u, tmp);
    for (std::size_t i = 0; i < size; ++i) u[i] = inv_lambda * tmp[i];
  }
  for (std::size_t i = 0; i < size; ++i) acc[i] /= static_cast<double>(n) * u[i];
  return GridFunction(op.grid(), std::move(acc));
}

std::vector<DeviationPoint> birkhoff_series(const TransferOperator& op, const EigenData& eig, const Potential& phi,
                                            const std::vector<int>& ns) {
  const double analytic = pressure_derivative(op, eig, phi);
  std::vector<DeviationPoint> out;
  for (int n : ns) {
    const auto b = birkhoff_derivative(op, eig, phi, n);
    double d = 0.0;
    for (double v : b.values) d = std::max(d, std::abs(v - analytic));
    out.push_back({n, d});
  }
  return out;
}

double claim1_identity_check(const TransferOperator& op, const EigenData& eig, const Potential& phi, int n,
                             double budget) {
  require_phi_depth(op, phi, "claim1_identity_check");
  if (n < 1) throw InvalidArgument("claim1_identity_check: n must be >= 1");
  const CylinderGrid& grid = op.grid();
  const auto un = static_cast<std::size_t>(n);
  const auto dphi = static_cast<std::size_t>(phi.depth);
  const auto birkhoff_sum = [&](NodeIndices y) {
    double s = 0.0;
    for (std::size_t j = 0; j < un; ++j) s += phi.eval(y.subspan(j, dphi));
    return s;
  };
  auto direct = branch_expansion(op.potential(), n, grid, birkhoff_sum, budget);
  const double scale = std::pow(eig.lambda, -n);
  for (double& v : direct) v *= scale;

  // Right-hand side, term by term.
  const std::size_t size = grid.size;
  const auto table = op.preimage_table(phi);
  std::vector<double> rhs(size, 0.0);
  std::vector<double> u(size, 1.0);
  std::vector<double> v(size);
  std::vector<double> tmp(size);
  for (int j = 0; j < n; ++j) {
    op.apply_weighted(table, u, v);
    for (double& x : v) x /= eig.lambda;
    for (int r = 1; r < n - j; ++r) {
      op.apply(v, tmp);
      for (std::size_t i = 0; i < size; ++i) v[i] = tmp[i] / eig.lambda;
    }
    for (std::size_t i = 0; i < size; ++i) rhs[i] += v[i];
    op.apply(u, tmp);
    for (std::size_t i = 0; i < size; ++i) u[i] = tmp[i] / eig.lambda;
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < size; ++i) worst = std::max(worst, std::abs(direct[i] - rhs[i]));
  return worst;
}

DerivativeReport derivative_report(const Potential& f, const Potential& phi, const std::vector<double>& steps,
                                   const std::vector<int>& birkhoff_ns, const PowerIterationOptions& options) {
  PowerIterationOptions opts = options;
  opts.compute_gap = false;
  const TransferOperator op(f);
  const auto eig = power_iteration(op, opts);
  DerivativeReport r;
  r.analytic = pressure_derivative(op, eig, phi);
  r.fd = fd_derivative(f, phi, steps, opts);
  r.richardson = richardson_extrapolate(r.fd);
  r.richardson_order = fitted_fd_order(r.fd, r.analytic);
  r.birkhoff = birkhoff_series(op, eig, phi, birkhoff_ns);
  return r;
}

}  // namespace ruelle
