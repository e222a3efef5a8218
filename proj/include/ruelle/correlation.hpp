#pragma once

// C(n) = int (phi o sigma^n) psi dm_f - int phi dm_f int psi dm_f, evaluated
// through the pull-out identity as <nu, phi lambda^{-n} L^n(psi h)> - means.

#include <cstddef>
#include <span>
#include <vector>

#include "ruelle/transfer.hpp"

namespace ruelle {

struct DecayFit {
  double K = 0.0;     // upper-envelope prefactor: |C(n)| <= K tau^n on every usable n
  double tau = 0.0;   // exp(slope) of the log-linear least-squares fit
  double K_ls = 0.0;  // exp(intercept) of the same fit
  double residual = 0.0;  // RMS residual in log|C|
  std::size_t points = 0;
};

inline constexpr double kCorrelationFloor = 1e-13;
inline constexpr int kFitSkip = 2;

struct CorrelationSeries {
  std::vector<double> values;  // C(0..N)
  DecayFit fit;
  double gap_tau = 0.0;
};

double correlation(const TransferOperator& op, const EigenData& eig, const GridFunction& phi,
                   const GridFunction& psi, int n);

/// C(0..n_max) in one accumulating pass over L^n (psi h).
std::vector<double> correlation_series(const TransferOperator& op, const EigenData& eig, const GridFunction& phi,
                                       const GridFunction& psi, int n_max);

/// Fits log|C(n)| on n >= skip, |C(n)| > floor. Needs at least 5 usable points.
DecayFit decay_fit(std::span<const double> series, double floor = kCorrelationFloor, int skip = kFitSkip);

CorrelationSeries correlation_report(const TransferOperator& op, const EigenData& eig, const GridFunction& phi,
                                     const GridFunction& psi, int n_max);

}  // namespace ruelle
