#include "ruelle/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <limits>
#include <string>

#include "ruelle/errors.hpp"
#include "ruelle/io.hpp"
#include "ruelle/rng.hpp"

namespace ruelle {

namespace {

std::size_t ipow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void require_positive(std::span<const double> v, const char* where) {
  for (double x : v)
    if (!(x > 0.0) || !std::isfinite(x))
      throw NumericalBreakdown(std::string(where) + ": nonpositive or non-finite iterate");
}

}  // namespace

CylinderGrid::CylinderGrid(std::size_t nodes, int d) : node_count(nodes), depth(d), size(ipow(nodes, d)) {
  if (nodes == 0 || d < 1) throw InvalidArgument("CylinderGrid: need nodes >= 1 and depth >= 1");
}

CylinderGrid CylinderGrid::for_potential(const Potential& f) {
  return CylinderGrid(f.alphabet->size(), std::max(f.depth - 1, 1));
}

std::vector<std::size_t> CylinderGrid::tuple(std::size_t index) const {
  std::vector<std::size_t> t(static_cast<std::size_t>(depth));
  for (std::size_t s = t.size(); s-- > 0;) {
    t[s] = index % node_count;
    index /= node_count;
  }
  return t;
}

std::size_t CylinderGrid::index(NodeIndices t) const {
  if (t.size() != static_cast<std::size_t>(depth)) throw InvalidArgument("CylinderGrid::index: wrong tuple length");
  std::size_t idx = 0;
  for (std::size_t i : t) {
    if (i >= node_count) throw InvalidArgument("CylinderGrid::index: node index out of range");
    idx = idx * node_count + i;
  }
  return idx;
}

GridFunction::GridFunction(CylinderGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size) throw InvalidArgument("GridFunction: value count does not match grid size");
  for (double x : values)
    if (!std::isfinite(x)) throw InvalidArgument("GridFunction: non-finite entry");
}

double GridFunction::sup_norm() const {
  double s = 0.0;
  for (double v : values) s = std::max(s, std::abs(v));
  return s;
}

GridFunction grid_function(const CylinderGrid& grid, const Potential& observable) {
  if (observable.alphabet->size() != grid.node_count)
    throw InvalidArgument("grid_function: observable lives on a different alphabet");
  if (observable.depth > grid.depth)
    throw InvalidArgument("grid_function: observable depth " + std::to_string(observable.depth) +
                          " exceeds grid depth " + std::to_string(grid.depth));
  return GridFunction(grid, tabulate(observable, grid.depth));
}

TransferOperator::TransferOperator(Potential f) : f_(std::move(f)), grid_(CylinderGrid::for_potential(f_)) {
  shift_stride_ = ipow(grid_.node_count, grid_.depth - 1);
  kernel_ = tabulate(f_, grid_.depth + 1);
  const auto w = f_.alphabet->weights();
  for (std::size_t a = 0; a < grid_.node_count; ++a)
    for (std::size_t x = 0; x < grid_.size; ++x) {
      double& k = kernel_[a * grid_.size + x];
      if (!std::isfinite(k)) throw InvalidArgument("TransferOperator: potential '" + f_.name + "' is not finite");
      k = w[a] * std::exp(k);
    }
}

GridFunction TransferOperator::apply(const GridFunction& phi) const {
  if (phi.grid != grid_)
    throw InvalidArgument("apply_transfer: grid of phi (depth " + std::to_string(phi.grid.depth) +
                          ") does not match operator grid (depth " + std::to_string(grid_.depth) + ")");
  GridFunction out(grid_, 0.0);
  apply(phi.values, out.values);
  return out;
}

void TransferOperator::apply(std::span<const double> in, std::span<double> out) const {
  if (in.size() != grid_.size || out.size() != grid_.size) throw InvalidArgument("apply_transfer: size mismatch");
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t a = 0; a < grid_.node_count; ++a) {
    const double* k = kernel_.data() + a * grid_.size;
    for (std::size_t x = 0; x < grid_.size; ++x) out[x] += k[x] * in[preimage(a, x)];
  }
}

void TransferOperator::apply_weighted(std::span<const double> g_table, std::span<const double> in,
                                      std::span<double> out) const {
  if (g_table.size() != kernel_.size()) throw InvalidArgument("apply_weighted: table size mismatch");
  if (in.size() != grid_.size || out.size() != grid_.size) throw InvalidArgument("apply_weighted: size mismatch");
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t a = 0; a < grid_.node_count; ++a) {
    const double* k = kernel_.data() + a * grid_.size;
    const double* g = g_table.data() + a * grid_.size;
    for (std::size_t x = 0; x < grid_.size; ++x) out[x] += k[x] * g[x] * in[preimage(a, x)];
  }
}

void TransferOperator::apply_adjoint(std::span<const double> in, std::span<double> out) const {
  if (in.size() != grid_.size || out.size() != grid_.size) throw InvalidArgument("apply_adjoint: size mismatch");
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t a = 0; a < grid_.node_count; ++a) {
    const double* k = kernel_.data() + a * grid_.size;
    for (std::size_t x = 0; x < grid_.size; ++x) out[preimage(a, x)] += k[x] * in[x];
  }
}

std::vector<double> TransferOperator::preimage_table(const Potential& g) const {
  if (g.alphabet->size() != grid_.node_count)
    throw InvalidArgument("preimage_table: observable lives on a different alphabet");
  if (g.depth > grid_.depth + 1)
    throw InvalidArgument("preimage_table: observable depth exceeds potential depth");
  return tabulate(g, grid_.depth + 1);
}

std::vector<double> TransferOperator::dense_matrix() const {
  if (grid_.size > kDenseAssemblyLimit)
    throw ResourceLimit("dense assembly of a grid with " + std::to_string(grid_.size) + " points",
                        static_cast<double>(grid_.size), static_cast<double>(kDenseAssemblyLimit));
  std::vector<double> m(grid_.size * grid_.size, 0.0);
  for (std::size_t a = 0; a < grid_.node_count; ++a)
    for (std::size_t x = 0; x < grid_.size; ++x) m[x * grid_.size + preimage(a, x)] += kernel_[a * grid_.size + x];
  return m;
}

EigenData power_iteration(const TransferOperator& op, const PowerIterationOptions& options) {
  if (!(options.tol > 0.0)) throw InvalidArgument("power_iteration: tol must be positive");
  const CylinderGrid& grid = op.grid();
  const std::size_t n = grid.size;
  EigenData eig;

  // Right eigenfunction: phi <- L phi / ||L phi||_0 from phi = 1.
  std::vector<double> phi(n, 1.0);
  std::vector<double> next(n);
  double log_prev = 0.0;
  double residual = std::numeric_limits<double>::infinity();
  long it = 0;
  for (; it < options.max_iter; ++it) {
    op.apply(phi, next);
    require_positive(next, "power_iteration");
    const double r = *std::max_element(next.begin(), next.end());
    residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] /= r;
      residual = std::max(residual, std::abs(next[i] - phi[i]));
    }
    phi.swap(next);
    const double log_r = std::log(r);
    const bool stable = it > 0 && std::abs(log_r - log_prev) < options.tol;
    log_prev = log_r;
    if (stable && residual < 0.1 * options.tol) break;
  }
  if (it == options.max_iter && residual > options.tol)
    throw NonConvergence("power_iteration: right eigenvector did not converge, residual " +
                             io::format_double(residual),
                         residual, it);
  eig.iterations = it + 1;

  // Left eigenmeasure: nu <- L^* nu / ||L^* nu||_1 from the uniform grid measure.
  std::vector<double> nu(n, 1.0 / static_cast<double>(n));
  double log_prev_left = 0.0;
  double residual_left = std::numeric_limits<double>::infinity();
  long it_left = 0;
  for (; it_left < options.max_iter; ++it_left) {
    op.apply_adjoint(nu, next);
    double s = 0.0;
    for (double v : next) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw NumericalBreakdown("power_iteration: negative adjoint iterate");
      s += v;
    }
    if (!(s > 0.0)) throw NumericalBreakdown("power_iteration: adjoint iterate vanished");
    residual_left = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] /= s;
      residual_left += std::abs(next[i] - nu[i]);
    }
    nu.swap(next);
    const double log_s = std::log(s);
    const bool stable = it_left > 0 && std::abs(log_s - log_prev_left) < options.tol;
    log_prev_left = log_s;
    if (stable && residual_left < 0.1 * options.tol) break;
  }
  if (it_left == options.max_iter && residual_left > options.tol)
    throw NonConvergence("power_iteration: left eigenmeasure did not converge, residual " +
                             io::format_double(residual_left),
                         residual_left, it_left);
  eig.iterations = std::max(eig.iterations, it_left + 1);

  // Rayleigh-style refinement and normalization <h, nu> = 1.
  op.apply(phi, next);
  const double lambda = dot(nu, next) / dot(nu, phi);
  const double scale = 1.0 / dot(nu, phi);
  for (double& v : phi) v *= scale;
  eig.lambda = lambda;
  eig.log_lambda = std::log(lambda);
  eig.h = GridFunction(grid, std::move(phi));
  eig.nu = std::move(nu);

  op.apply(eig.h.values, next);
  eig.residual_right = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    eig.residual_right = std::max(eig.residual_right, std::abs(next[i] / lambda - eig.h.values[i]));
  op.apply_adjoint(eig.nu, next);
  eig.residual_left = 0.0;
  for (std::size_t i = 0; i < n; ++i) eig.residual_left += std::abs(next[i] / lambda - eig.nu[i]);
  if (eig.residual_right > options.tol || eig.residual_left > options.tol)
    throw NonConvergence("power_iteration: final residuals " + io::format_double(eig.residual_right) + ", " +
                             io::format_double(eig.residual_left) + " exceed tol",
                         std::max(eig.residual_right, eig.residual_left), eig.iterations);

  if (!options.compute_gap) return eig;

  // Subleading modulus: two-vector subspace iteration on L(I - pi), with
  // pi(phi) = <phi, nu> h, and Rayleigh-Ritz on the 2x2 projection. Two
  // vectors capture a real pair, a +-tau pair or a complex-conjugate pair.
  const auto project = [&](std::vector<double>& v) {
    const double c = dot(eig.nu, v);
    for (std::size_t i = 0; i < n; ++i) v[i] -= c * eig.h.values[i];
  };
  Rng rng(options.gap_seed);
  const auto random_start = [&](std::vector<double>& v) {
    for (double& x : v) x = 2.0 * rng.uniform() - 1.0;
    project(v);
  };
  // Orthonormalizes (a, b) in place; returns false when a vanishes.
  const auto orthonormalize = [&](std::vector<double>& a, std::vector<double>& b, double scale) {
    const double na = norm2(a);
    if (!(na > 1e-15 * scale)) return false;
    for (double& x : a) x /= na;
    for (int pass = 0; pass < 2; ++pass) {
      const double c = dot(a, b);
      for (std::size_t i = 0; i < n; ++i) b[i] -= c * a[i];
    }
    double nb = norm2(b);
    if (!(nb > 1e-13 * na)) {
      // Rank-deficient block: restart the second direction.
      random_start(b);
      for (int pass = 0; pass < 2; ++pass) {
        const double c = dot(a, b);
        for (std::size_t i = 0; i < n; ++i) b[i] -= c * a[i];
      }
      nb = norm2(b);
    }
    for (double& x : b) x /= nb;
    return true;
  };
  const auto ritz_modulus = [](double h11, double h12, double h21, double h22) {
    const double half_tr = 0.5 * (h11 + h22);
    const double det = h11 * h22 - h12 * h21;
    const double disc = half_tr * half_tr - det;
    if (disc >= 0.0) return std::abs(half_tr) + std::sqrt(disc);
    return std::sqrt(det);
  };

  const double gap_tol = std::max(1e-13, 1e-3 * options.tol);
  const long gap_max_iter = std::min<long>(options.max_iter, 20'000);
  std::vector<double> v1(n), v2(n), w1(n), w2(n);
  random_start(v1);
  random_start(v2);
  double gap = 0.0;
  long git = 0;
  if (n >= 2 && orthonormalize(v1, v2, 1.0)) {
    double prev = -1.0;
    int stable_steps = 0;
    for (; git < gap_max_iter; ++git) {
      op.apply(v1, w1);
      op.apply(v2, w2);
      project(w1);
      project(w2);
      const double mod = ritz_modulus(dot(v1, w1), dot(v1, w2), dot(v2, w1), dot(v2, w2)) / lambda;
      const double wn = std::max(norm2(w1), norm2(w2)) / lambda;
      if (!(wn > 1e-15)) {
        gap = 0.0;
        break;
      }
      gap = mod;
      stable_steps = prev >= 0.0 && std::abs(mod - prev) < gap_tol * std::max(mod, 1e-300) ? stable_steps + 1 : 0;
      if (stable_steps >= 3) break;
      prev = mod;
      if (!orthonormalize(w1, w2, lambda)) {
        gap = 0.0;
        break;
      }
      v1.swap(w1);
      v2.swap(w2);
    }
    if (gap < 1e-15) gap = 0.0;
  }
  eig.gap_ratio = std::min(gap, 1.0);
  eig.gap_iterations = git;
  return eig;
}

std::vector<double> rpf_convergence_probe(const TransferOperator& op, const EigenData& eig, const GridFunction& phi,
                                          int n_max) {
  if (phi.grid != op.grid()) throw InvalidArgument("rpf_convergence_probe: grid mismatch");
  const double mean = dot(phi.values, eig.nu);
  std::vector<double> v = phi.values;
  std::vector<double> next(v.size());
  std::vector<double> errors;
  errors.reserve(static_cast<std::size_t>(n_max) + 1);
  for (int k = 0; k <= n_max; ++k) {
    double e = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) e = std::max(e, std::abs(v[i] - mean * eig.h.values[i]));
    errors.push_back(e);
    if (k == n_max) break;
    op.apply(v, next);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = next[i] / eig.lambda;
  }
  return errors;
}

std::vector<double> branch_expansion(const Potential& f, int n, const CylinderGrid& grid,
                                     const std::function<double(NodeIndices y)>& g, double budget) {
  if (n < 1) throw InvalidArgument("branch_expansion: n must be >= 1");
  if (grid.depth < f.depth - 1) throw InvalidArgument("branch_expansion: grid too shallow for potential");
  const std::size_t nodes = grid.node_count;
  const double branches = std::pow(static_cast<double>(nodes), n) * static_cast<double>(grid.size);
  if (branches > budget)
    throw ResourceLimit("branch expansion needs " + io::format_double(branches) + " branch evaluations",
                        branches, budget);
  const auto m = static_cast<std::size_t>(grid.depth);
  const auto un = static_cast<std::size_t>(n);
  const auto k = static_cast<std::size_t>(f.depth);
  const std::size_t count = ipow(nodes, n);
  const auto w = f.alphabet->weights();
  std::vector<double> out(grid.size, 0.0);
  std::vector<std::size_t> y(un + m);
  for (std::size_t x = 0; x < grid.size; ++x) {
    const auto xt = grid.tuple(x);
    std::copy(xt.begin(), xt.end(), y.begin() + static_cast<std::ptrdiff_t>(un));
    std::fill(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(un), 0);
    double total = 0.0;
    for (std::size_t b = 0; b < count; ++b) {
      double weight = 1.0;
      double energy = 0.0;
      for (std::size_t j = 0; j < un; ++j) {
        weight *= w[y[j]];
        energy += f.eval(NodeIndices(y).subspan(j, k));
      }
      total += weight * std::exp(energy) * g(y);
      for (std::size_t s = un; s-- > 0;) {
        if (++y[s] < nodes) break;
        y[s] = 0;
      }
    }
    out[x] = total;
  }
  return out;
}

double pull_out_check(const TransferOperator& op, const EigenData& eig, const GridFunction& phi,
                      const GridFunction& psi, int n, double budget) {
  const CylinderGrid& grid = op.grid();
  if (phi.grid != grid || psi.grid != grid) throw InvalidArgument("pull_out_check: grid mismatch");
  const auto un = static_cast<std::size_t>(n);
  const auto m = static_cast<std::size_t>(grid.depth);
  // (phi o sigma^n)(y) reads the tail x; (psi h)(y) reads the head y_1..y_m.
  const auto integrand = [&](NodeIndices y) {
    std::size_t head = 0;
    std::size_t tail = 0;
    for (std::size_t i = 0; i < m; ++i) {
      head = head * grid.node_count + y[i];
      tail = tail * grid.node_count + y[un + i];
    }
    return phi.values[tail] * psi.values[head] * eig.h.values[head];
  };
  const auto lhs = branch_expansion(op.potential(), n, grid, integrand, budget);

  std::vector<double> v(grid.size);
  for (std::size_t i = 0; i < grid.size; ++i) v[i] = psi.values[i] * eig.h.values[i];
  std::vector<double> next(grid.size);
  for (int j = 0; j < n; ++j) {
    op.apply(v, next);
    v.swap(next);
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size; ++i) worst = std::max(worst, std::abs(lhs[i] - phi.values[i] * v[i]));
  return worst;
}

}  // namespace ruelle
