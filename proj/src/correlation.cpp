#include "ruelle/correlation.hpp"

#include <algorithm>
#include <cmath>

#include "ruelle/errors.hpp"

namespace ruelle {

namespace {

void require_grid(const TransferOperator& op, const GridFunction& g, const char* who) {
  if (g.grid != op.grid()) throw InvalidArgument(std::string(who) + ": observable grid does not match operator");
}

}  // namespace

double correlation(const TransferOperator& op, const EigenData& eig, const GridFunction& phi,
                   const GridFunction& psi, int n) {
  if (n < 0) throw InvalidArgument("correlation: n must be >= 0");
  return correlation_series(op, eig, phi, psi, n).back();
}

std::vector<double> correlation_series(const TransferOperator& op, const EigenData& eig, const GridFunction& phi,
                                       const GridFunction& psi, int n_max) {
  require_grid(op, phi, "correlation");
  require_grid(op, psi, "correlation");
  if (n_max < 0) throw InvalidArgument("correlation: n_max must be >= 0");
  const std::size_t size = op.grid().size;
  double mean_phi = 0.0;
  double mean_psi = 0.0;
  std::vector<double> v(size);
  for (std::size_t i = 0; i < size; ++i) {
    mean_phi += eig.nu[i] * phi.values[i] * eig.h.values[i];
    mean_psi += eig.nu[i] * psi.values[i] * eig.h.values[i];
    v[i] = psi.values[i] * eig.h.values[i];
  }
  std::vector<double> next(size);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n_max) + 1);
  for (int n = 0; n <= n_max; ++n) {
    double s = 0.0;
    for (std::size_t i = 0; i < size; ++i) s += eig.nu[i] * phi.values[i] * v[i];
    out.push_back(s - mean_phi * mean_psi);
    if (n == n_max) break;
    op.apply(v, next);
    for (std::size_t i = 0; i < size; ++i) v[i] = next[i] / eig.lambda;
  }
  return out;
}

DecayFit decay_fit(std::span<const double> series, double floor, int skip) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t n = static_cast<std::size_t>(std::max(skip, 0)); n < series.size(); ++n) {
    const double c = std::abs(series[n]);
    if (c > floor) {
      xs.push_back(static_cast<double>(n));
      ys.push_back(std::log(c));
    }
  }
  if (xs.size() < 5)
    throw InsufficientData("decay_fit: only " + std::to_string(xs.size()) + " usable points (need 5)");
  const double m = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / m;
  DecayFit fit;
  fit.tau = std::exp(slope);
  fit.K_ls = std::exp(intercept);
  fit.points = xs.size();
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (intercept + slope * xs[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / m);
  // The envelope covers the leading transient as well.
  for (std::size_t n = 0; n < series.size(); ++n) {
    const double c = std::abs(series[n]);
    if (c > floor) fit.K = std::max(fit.K, c * std::exp(-slope * static_cast<double>(n)));
  }
  return fit;
}

CorrelationSeries correlation_report(const TransferOperator& op, const EigenData& eig, const GridFunction& phi,
                                     const GridFunction& psi, int n_max) {
  CorrelationSeries s;
  s.values = correlation_series(op, eig, phi, psi, n_max);
  s.fit = decay_fit(s.values);
  s.gap_tau = eig.gap_ratio;
  return s;
}

}  // namespace ruelle
