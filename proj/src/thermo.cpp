#include "ruelle/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ruelle/errors.hpp"

namespace ruelle {

double pressure(const EigenData& eig) { return eig.log_lambda; }

double pressure(const Potential& f, const PowerIterationOptions& options) {
  PowerIterationOptions opts = options;
  opts.compute_gap = false;
  return power_iteration(TransferOperator(f), opts).log_lambda;
}

double equilibrium_integral(const TransferOperator& op, const EigenData& eig, const Potential& g) {
  const CylinderGrid& grid = op.grid();
  if (g.depth <= grid.depth) {
    const auto values = grid_function(grid, g).values;
    double s = 0.0;
    for (std::size_t i = 0; i < grid.size; ++i) s += values[i] * eig.h.values[i] * eig.nu[i];
    return s;
  }
  std::vector<double> out(grid.size);
  op.apply_weighted(op.preimage_table(g), eig.h.values, out);
  double s = 0.0;
  for (std::size_t i = 0; i < grid.size; ++i) s += eig.nu[i] * out[i];
  return s / eig.lambda;
}

GridFunction finite_n_pressure(const TransferOperator& op, int n) {
  if (n < 1) throw InvalidArgument("finite_n_pressure: n must be >= 1");
  const std::size_t size = op.grid().size;
  std::vector<double> v(size, 1.0);
  std::vector<double> next(size);
  double log_scale = 0.0;
  for (int j = 0; j < n; ++j) {
    op.apply(v, next);
    const double s = *std::max_element(next.begin(), next.end());
    for (std::size_t i = 0; i < size; ++i) v[i] = next[i] / s;
    log_scale += std::log(s);
  }
  for (double& x : v) x = (log_scale + std::log(x)) / n;
  return GridFunction(op.grid(), std::move(v));
}

std::vector<DeviationPoint> finite_n_deviation(const TransferOperator& op, double pressure_value,
                                               const std::vector<int>& ns) {
  if (ns.empty()) return {};
  const int n_max = *std::max_element(ns.begin(), ns.end());
  if (*std::min_element(ns.begin(), ns.end()) < 1) throw InvalidArgument("finite_n_deviation: n must be >= 1");
  const std::size_t size = op.grid().size;
  std::vector<double> v(size, 1.0);
  std::vector<double> next(size);
  double log_scale = 0.0;
  std::map<int, double> dev;
  for (int j = 1; j <= n_max; ++j) {
    op.apply(v, next);
    const double s = *std::max_element(next.begin(), next.end());
    for (std::size_t i = 0; i < size; ++i) v[i] = next[i] / s;
    log_scale += std::log(s);
    if (std::find(ns.begin(), ns.end(), j) != ns.end()) {
      double d = 0.0;
      for (double x : v) d = std::max(d, std::abs((log_scale + std::log(x)) / j - pressure_value));
      dev[j] = d;
    }
  }
  std::vector<DeviationPoint> out;
  for (int n : ns) out.push_back({n, dev.at(n)});
  return out;
}

double entropy(const TransferOperator& op, const EigenData& eig) {
  return eig.log_lambda - equilibrium_integral(op, eig, op.potential());
}

PressureReport pressure_report(const TransferOperator& op, const EigenData& eig, const std::vector<int>& ns) {
  PressureReport r;
  r.pressure = eig.log_lambda;
  r.energy = equilibrium_integral(op, eig, op.potential());
  r.entropy = r.pressure - r.energy;
  r.finite_n_sup_dev = finite_n_deviation(op, r.pressure, ns);
  for (const auto& p : r.finite_n_sup_dev) r.finite_n_constant = std::max(r.finite_n_constant, p.n * p.sup_dev);
  return r;
}

Potential with_depth(const Potential& f, int depth) {
  if (depth < f.depth) throw InvalidArgument("with_depth: cannot reduce depth");
  Potential g = f;
  g.depth = depth;
  g.eval = [inner = f.eval, d = static_cast<std::size_t>(f.depth)](NodeIndices x) { return inner(x.first(d)); };
  return g;
}

double grid_sup_distance(const Potential& f, const Potential& g) {
  if (!same_alphabet(f.alphabet, g.alphabet)) throw InvalidArgument("grid_sup_distance: different alphabets");
  const int depth = std::max(f.depth, g.depth);
  const auto a = tabulate(f, depth);
  const auto b = tabulate(g, depth);
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

bool LipschitzCheck::holds(double slack) const {
  if (lhs > rhs + slack) return false;
  return std::all_of(finite_n.begin(), finite_n.end(), [&](const FiniteN& p) { return p.lhs <= rhs + slack; });
}

LipschitzCheck pressure_lipschitz_check(const Potential& f, const Potential& g, const PowerIterationOptions& options,
                                        const std::vector<int>& ns) {
  const int depth = std::max(f.depth, g.depth);
  const TransferOperator lf(with_depth(f, depth));
  const TransferOperator lg(with_depth(g, depth));
  PowerIterationOptions opts = options;
  opts.compute_gap = false;
  LipschitzCheck check;
  check.lhs = std::abs(power_iteration(lf, opts).log_lambda - power_iteration(lg, opts).log_lambda);
  check.rhs = grid_sup_distance(f, g);
  for (int n : ns) {
    const auto pf = finite_n_pressure(lf, n);
    const auto pg = finite_n_pressure(lg, n);
    double d = 0.0;
    for (std::size_t i = 0; i < pf.values.size(); ++i) d = std::max(d, std::abs(pf.values[i] - pg.values[i]));
    check.finite_n.push_back({n, d});
  }
  return check;
}

double variational_inequality_check(const Potential& f, const Potential& g, const PowerIterationOptions& options) {
  PowerIterationOptions opts = options;
  opts.compute_gap = false;
  const int depth = std::max(f.depth, g.depth);
  const Potential fd = with_depth(f, depth);
  const Potential gd = with_depth(g, depth);
  const TransferOperator lf(fd);
  const TransferOperator lg(gd);
  const auto ef = power_iteration(lf, opts);
  const auto eg = power_iteration(lg, opts);
  const double h_mg = eg.log_lambda - equilibrium_integral(lg, eg, gd);
  return ef.log_lambda - (h_mg + equilibrium_integral(lg, eg, fd));
}

}  // namespace ruelle
