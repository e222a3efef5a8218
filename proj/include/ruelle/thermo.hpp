#pragma once

// Pressure, equilibrium integrals, entropy and the finite-n pressure
// Phi_n(f, x) = (1/n) log L^n 1 (x).

#include <vector>

#include "ruelle/transfer.hpp"

namespace ruelle {

struct DeviationPoint {
  int n = 0;
  double sup_dev = 0.0;
};

struct PressureReport {
  double pressure = 0.0;
  double entropy = 0.0;
  double energy = 0.0;
  std::vector<DeviationPoint> finite_n_sup_dev;
  /// Fitted C in sup_dev <= C / n (max of n * sup_dev).
  double finite_n_constant = 0.0;
};

double pressure(const EigenData& eig);
double pressure(const Potential& f, const PowerIterationOptions& options = {});

/// Integral of g (depth <= k) against m_f = h nu. Observables of depth <= m are
/// summed directly; depth m + 1 goes through lambda^{-1} <nu, L(g h)>.
double equilibrium_integral(const TransferOperator& op, const EigenData& eig, const Potential& g);

/// Phi_n(f, .) on the grid, computed with running renormalization.
GridFunction finite_n_pressure(const TransferOperator& op, int n);

/// sup_x |Phi_n(f, x) - P(f)| for every n in `ns` (ascending order not required).
std::vector<DeviationPoint> finite_n_deviation(const TransferOperator& op, double pressure_value,
                                               const std::vector<int>& ns);

double entropy(const TransferOperator& op, const EigenData& eig);

PressureReport pressure_report(const TransferOperator& op, const EigenData& eig, const std::vector<int>& ns);

/// Same potential on a deeper grid (depth >= f.depth).
Potential with_depth(const Potential& f, int depth);

/// sup over the common depth-k node grid of |f - g|.
double grid_sup_distance(const Potential& f, const Potential& g);

struct LipschitzCheck {
  double lhs = 0.0;  // |P(f) - P(g)|
  double rhs = 0.0;  // ||f - g||_0
  struct FiniteN {
    int n = 0;
    double lhs = 0.0;  // sup_x |Phi_n(f, x) - Phi_n(g, x)|
  };
  std::vector<FiniteN> finite_n;
  bool holds(double slack = 1e-10) const;
};

LipschitzCheck pressure_lipschitz_check(const Potential& f, const Potential& g,
                                        const PowerIterationOptions& options = {},
                                        const std::vector<int>& ns = {1, 4, 16});

/// P(f) - [h(m_g) + int f dm_g]; nonnegative by the variational principle.
double variational_inequality_check(const Potential& f, const Potential& g,
                                    const PowerIterationOptions& options = {});

}  // namespace ruelle
