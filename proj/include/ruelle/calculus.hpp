#pragma once

// Derivative of the pressure, P'(f) phi = int phi h_f d nu_f, together with its
// finite-difference and Birkhoff-sum representations.

#include <vector>

#include "ruelle/thermo.hpp"

namespace ruelle {

struct FdPoint {
  double step = 0.0;
  double value = 0.0;  // (P(f + t phi) - P(f - t phi)) / 2t
};

struct DerivativeReport {
  double analytic = 0.0;
  std::vector<FdPoint> fd;
  double richardson = 0.0;
  /// Least-squares slope of log|fd(t) - analytic| against log t; NaN when every
  /// error sits at the roundoff floor.
  double richardson_order = 0.0;
  std::vector<DeviationPoint> birkhoff;
};

inline const std::vector<double> kDefaultFdSteps = {1e-2, 5e-3, 2.5e-3};

/// phi may have depth up to the depth of f.
double pressure_derivative(const TransferOperator& op, const EigenData& eig, const Potential& phi);

std::vector<FdPoint> fd_derivative(const Potential& f, const Potential& phi, const std::vector<double>& steps,
                                   const PowerIterationOptions& options = {});

/// Polynomial extrapolation in t^2 to t = 0 through every central difference.
double richardson_extrapolate(const std::vector<FdPoint>& fd);

double fitted_fd_order(const std::vector<FdPoint>& fd, double analytic);

/// (1/n) L^n(S_n phi) / L^n 1 through the telescoped expansion
/// lambda^{-n} L^n(S_n phi) = sum_j lambda^{-(n-j)} L^{n-j}(phi lambda^{-j} L^j 1).
GridFunction birkhoff_derivative(const TransferOperator& op, const EigenData& eig, const Potential& phi, int n);

/// sup_x |birkhoff_derivative(n) - analytic| for each n.
std::vector<DeviationPoint> birkhoff_series(const TransferOperator& op, const EigenData& eig, const Potential& phi,
                                            const std::vector<int>& ns);

/// Max discrepancy between lambda^{-n} L^n(S_n phi) summed over all preimage
/// branches and the telescoped expansion. Small grids and n only.
double claim1_identity_check(const TransferOperator& op, const EigenData& eig, const Potential& phi, int n,
                             double budget = kBranchBudget);

DerivativeReport derivative_report(const Potential& f, const Potential& phi,
                                   const std::vector<double>& steps = kDefaultFdSteps,
                                   const std::vector<int>& birkhoff_ns = {},
                                   const PowerIterationOptions& options = {});

}  // namespace ruelle
