#pragma once

// Potentials on the sequence space M^N: depth-k cylinder functions carrying a
// certified Hoelder bound with respect to d(x, y) = sum_n 2^{-n} d_M(x_n, y_n).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ruelle/alphabet.hpp"

namespace ruelle {

using NodeIndices = std::span<const std::size_t>;

struct Potential {
  AlphabetPtr alphabet;
  int depth = 1;
  /// Receives exactly `depth` node indices (x_1, ..., x_depth).
  std::function<double(NodeIndices)> eval;
  double holder_alpha = 0.5;
  /// Upper bound on Hol_alpha(f).
  double holder_const = 0.0;
  /// Sup-norm distance to the (untruncated) potential this one stands for.
  double tail_error = 0.0;
  std::string name;

  /// Evaluates on the first `depth` entries of x.
  double operator()(NodeIndices x) const { return eval(x.first(static_cast<std::size_t>(depth))); }

  /// Certified Hoelder constant for a smaller exponent a <= holder_alpha,
  /// using d <= diam on the sequence space.
  double holder_const_at(double a) const;
};

inline constexpr double kDefaultHolderAlpha = 0.5;

/// Hol_a bound implied by a Lipschitz constant on a space of diameter `diameter`.
double lipschitz_to_holder(double lipschitz, double diameter, double a);

/// Hol_a bound for any depth-k cylinder with oscillation `oscillation` on an
/// alphabet whose smallest nonzero node distance is `min_distance`.
double cylinder_holder_bound(double oscillation, int depth, double min_distance, double a);

/// Smallest positive node distance (brute force over pairs).
double min_node_distance(const Alphabet& alphabet);

// -- constructors ----------------------------------------------------------

Potential constant_potential(AlphabetPtr alphabet, double value);

/// Values in row-major order over (x_1, ..., x_depth), x_1 most significant.
Potential table_potential(AlphabetPtr alphabet, int depth, std::vector<double> values,
                          std::string name = "custom-table",
                          double holder_alpha = kDefaultHolderAlpha);

/// beta * x_1 . x_2 on a unit-vector alphabet (circle: beta cos(t_1 - t_2)).
Potential dot_coupling_potential(AlphabetPtr alphabet, double beta, std::string name = "dot-coupling");

/// field * x_1[c] + coupling * x_1[c] * x_2[c].
Potential coordinate_coupling_potential(AlphabetPtr alphabet, std::size_t component, double field,
                                        double coupling);

/// x_position[component] for 1-based `position`; depth = position.
Potential coordinate_observable(AlphabetPtr alphabet, int position, std::size_t component);

/// sum_{|n|<=W} e^{-alpha_decay |n|} s_{(1,n)} . s_{(2,n)} on the windowed
/// chain alphabet. The dropped tail |n| > W is recorded in `tail_error`.
Potential heisenberg_potential(const ChainWindowPtr& window, double alpha_decay);

// -- combinators -----------------------------------------------------------

Potential scaled(const Potential& f, double c);
Potential shifted(const Potential& f, double c);
/// a f + b g on a common alphabet; depth = max depth, exponent = min exponent.
Potential linear_combination(double a, const Potential& f, double b, const Potential& g);

/// Tabulates f as a depth-`depth` cylinder (depth >= f.depth), row-major.
std::vector<double> tabulate(const Potential& f, int depth);

// -- sequence metric -------------------------------------------------------

struct SeqDistance {
  double value = 0.0;       // partial sum up to `depth`
  double tail_bound = 0.0;  // diam * 2^{-depth}; true distance in [value, value + tail_bound]
};

SeqDistance seq_metric(const Alphabet& alphabet, NodeIndices x, NodeIndices y, int depth);

// -- truncation of general potentials --------------------------------------

/// A potential on full sequences, evaluated on eventually-constant sequences
/// x = (prefix..., tail, tail, ...).
struct SequencePotential {
  AlphabetPtr alphabet;
  std::function<double(NodeIndices prefix, std::size_t tail)> eval;
  double holder_alpha = kDefaultHolderAlpha;
  double holder_const = 0.0;
  std::string name;
  /// Set when the potential is known to depend on finitely many coordinates.
  std::optional<int> cylinder_depth;
};

SequencePotential as_sequence_potential(const Potential& f);

struct TruncationReport {
  int depth = 0;
  double sup_error_bound = 0.0;
};

/// f_k(x_1..x_k) = f(x_1..x_k, anchor, anchor, ...); anchor defaults to node 0.
std::pair<Potential, TruncationReport> truncate(const SequencePotential& f, int k,
                                                std::optional<std::size_t> anchor = std::nullopt);

/// Largest observed |f(x) - f(y)| / d(x, y)^alpha over random node-sequence
/// pairs. The pairs agree beyond f.depth, so the distance is exact.
double holder_certificate(const Potential& f, std::size_t samples, std::uint64_t rng_seed);

}  // namespace ruelle
