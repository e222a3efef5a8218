#pragma once

// Discretized Ruelle operator (L phi)(x) = sum_a w_a e^{f(ax)} phi(ax) on
// cylinder functions of depth m = max(k-1, 1), where k is the depth of f.
// On that space the operator is exact: no further approximation is made.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ruelle/potential.hpp"

namespace ruelle {

/// Tuples (i_1, ..., i_m) of node indices, row-major with i_1 most significant.
struct CylinderGrid {
  std::size_t node_count = 1;
  int depth = 1;
  std::size_t size = 1;

  CylinderGrid() = default;
  CylinderGrid(std::size_t nodes, int depth);
  static CylinderGrid for_potential(const Potential& f);

  std::vector<std::size_t> tuple(std::size_t index) const;
  std::size_t index(NodeIndices tuple) const;
  friend bool operator==(const CylinderGrid&, const CylinderGrid&) = default;
};

struct GridFunction {
  CylinderGrid grid;
  std::vector<double> values;

  GridFunction() = default;
  GridFunction(CylinderGrid g, double fill) : grid(g), values(g.size, fill) {}
  GridFunction(CylinderGrid g, std::vector<double> v);

  double sup_norm() const;
};

/// Tabulates an observable of depth <= grid.depth on the grid.
GridFunction grid_function(const CylinderGrid& grid, const Potential& observable);

class TransferOperator {
 public:
  explicit TransferOperator(Potential f);

  const Potential& potential() const { return f_; }
  const CylinderGrid& grid() const { return grid_; }
  const Alphabet& alphabet() const { return *f_.alphabet; }

  GridFunction apply(const GridFunction& phi) const;
  void apply(std::span<const double> in, std::span<double> out) const;

  /// out = L(g * in), where g has depth <= m + 1 and is tabulated by
  /// `preimage_table` on the preimage layout (a, x_1, ..., x_m).
  void apply_weighted(std::span<const double> g_table, std::span<const double> in, std::span<double> out) const;

  /// Adjoint on grid measures: <L^* nu, phi> = <nu, L phi>.
  void apply_adjoint(std::span<const double> in, std::span<double> out) const;

  /// Observable of depth <= m + 1 tabulated over (a, x_1..x_m), a most significant.
  std::vector<double> preimage_table(const Potential& g) const;

  /// Dense matrix (row-major, size x size) of the operator; grids <= 4096 only.
  std::vector<double> dense_matrix() const;

 private:
  std::size_t preimage(std::size_t a, std::size_t x) const { return a * shift_stride_ + x / grid_.node_count; }

  Potential f_;
  CylinderGrid grid_;
  std::size_t shift_stride_ = 1;  // N^{m-1}
  std::vector<double> kernel_;    // w_a e^{f(a, x)} at a * size + x
};

inline constexpr std::size_t kDenseAssemblyLimit = 4096;

struct EigenData {
  double lambda = 0.0;
  double log_lambda = 0.0;
  GridFunction h;          // right eigenfunction, <h, nu> = 1
  std::vector<double> nu;  // left eigenmeasure marginal on the grid, sums to 1
  double gap_ratio = 0.0;  // modulus of the subleading spectrum over lambda
  long iterations = 0;
  long gap_iterations = 0;
  double residual_right = 0.0;  // ||L h / lambda - h||_0
  double residual_left = 0.0;   // ||L^* nu / lambda - nu||_1
};

struct PowerIterationOptions {
  double tol = 1e-10;
  long max_iter = 100'000;
  bool compute_gap = true;
  std::uint64_t gap_seed = 0x9e3779b97f4a7c15ULL;
};

EigenData power_iteration(const TransferOperator& op, const PowerIterationOptions& options = {});

/// e_n = || lambda^{-n} L^n phi - h <phi, nu> ||_0 for n = 0..n_max.
std::vector<double> rpf_convergence_probe(const TransferOperator& op, const EigenData& eig,
                                          const GridFunction& phi, int n_max);

inline constexpr double kBranchBudget = 1e6;

/// (L^n g)(x) by summing over every preimage branch b in M^n. `g` receives
/// the concatenated sequence y = (b_1, ..., b_n, x_1, ..., x_m). The total
/// number of branches over all x in `points` must stay within `budget`.
std::vector<double> branch_expansion(const Potential& f, int n, const CylinderGrid& grid,
                                     const std::function<double(NodeIndices y)>& g,
                                     double budget = kBranchBudget);

/// sup_x | L^n((phi o sigma^n) psi h)(x) - phi(x) L^n(psi h)(x) |, with the left
/// side evaluated by explicit branch summation.
double pull_out_check(const TransferOperator& op, const EigenData& eig, const GridFunction& phi,
                      const GridFunction& psi, int n, double budget = kBranchBudget);

}  // namespace ruelle
