#include "ruelle/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ruelle/errors.hpp"
#include "ruelle/rng.hpp"

namespace ruelle {

namespace {

std::size_t ipow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

void require_unit_vectors(const Alphabet& a, const char* who) {
  if (a.dim() != 2 && a.dim() != 3)
    throw InvalidArgument(std::string(who) + ": alphabet '" + a.name() + "' is not a circle or sphere");
}

double dot_nodes(const Alphabet& a, std::size_t i, std::size_t j) {
  const auto x = a.node(i);
  const auto y = a.node(j);
  double s = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) s += x[c] * y[c];
  return s;
}

}  // namespace

double Potential::holder_const_at(double a) const {
  if (a > holder_alpha || a <= 0.0)
    throw InvalidArgument("holder_const_at: exponent must lie in (0, holder_alpha]");
  return holder_const * std::pow(alphabet->diameter(), holder_alpha - a);
}

double lipschitz_to_holder(double lipschitz, double diameter, double a) {
  return lipschitz * std::pow(diameter, 1.0 - a);
}

double cylinder_holder_bound(double oscillation, int depth, double min_distance, double a) {
  if (oscillation == 0.0) return 0.0;
  return oscillation * std::pow(std::ldexp(1.0, depth) / min_distance, a);
}

double min_node_distance(const Alphabet& alphabet) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < alphabet.size(); ++i)
    for (std::size_t j = i + 1; j < alphabet.size(); ++j) {
      const double d = alphabet.distance(i, j);
      if (d > 0.0) best = std::min(best, d);
    }
  return std::isfinite(best) ? best : 1.0;
}

Potential constant_potential(AlphabetPtr alphabet, double value) {
  Potential f;
  f.alphabet = std::move(alphabet);
  f.depth = 1;
  f.eval = [value](NodeIndices) { return value; };
  f.holder_const = 0.0;
  f.name = "constant";
  return f;
}

Potential table_potential(AlphabetPtr alphabet, int depth, std::vector<double> values, std::string name,
                          double holder_alpha) {
  if (depth < 1) throw InvalidArgument("table_potential: depth must be >= 1");
  const std::size_t n = alphabet->size();
  if (values.size() != ipow(n, depth))
    throw InvalidArgument("table_potential: expected " + std::to_string(ipow(n, depth)) + " values, got " +
                          std::to_string(values.size()));
  for (double v : values)
    if (!std::isfinite(v)) throw InvalidArgument("table_potential: non-finite table entry");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  Potential f;
  f.holder_alpha = holder_alpha;
  f.holder_const = cylinder_holder_bound(*hi - *lo, depth, min_node_distance(*alphabet), holder_alpha);
  f.alphabet = std::move(alphabet);
  f.depth = depth;
  f.name = std::move(name);
  f.eval = [n, table = std::move(values)](NodeIndices x) {
    std::size_t idx = 0;
    for (std::size_t i : x) idx = idx * n + i;
    return table[idx];
  };
  return f;
}

Potential dot_coupling_potential(AlphabetPtr alphabet, double beta, std::string name) {
  require_unit_vectors(*alphabet, "dot_coupling_potential");
  Potential f;
  f.depth = 2;
  f.holder_const = lipschitz_to_holder(4.0 * std::abs(beta), alphabet->diameter(), f.holder_alpha);
  f.name = std::move(name);
  f.eval = [a = alphabet.get(), beta](NodeIndices x) { return beta * dot_nodes(*a, x[0], x[1]); };
  f.alphabet = std::move(alphabet);
  return f;
}

Potential coordinate_coupling_potential(AlphabetPtr alphabet, std::size_t component, double field,
                                        double coupling) {
  if (component >= alphabet->dim())
    throw InvalidArgument("coordinate_coupling_potential: component out of range");
  Potential f;
  f.depth = coupling == 0.0 ? 1 : 2;
  f.name = "coordinate-coupling";
  const Alphabet* a = alphabet.get();
  f.eval = [a, component, field, coupling](NodeIndices x) {
    const double c1 = a->node(x[0])[component];
    if (coupling == 0.0) return field * c1;
    return field * c1 + coupling * c1 * a->node(x[1])[component];
  };
  if (!alphabet->coordinate_lipschitz().empty()) {
    double bound = 0.0;
    for (std::size_t i = 0; i < alphabet->size(); ++i) bound = std::max(bound, std::abs(alphabet->node(i)[component]));
    const double lc = alphabet->coordinate_lipschitz()[component];
    const double l1 = (std::abs(field) + std::abs(coupling) * bound) * lc;
    const double l2 = std::abs(coupling) * bound * lc;
    f.holder_const = lipschitz_to_holder(std::max(2.0 * l1, 4.0 * l2), alphabet->diameter(), f.holder_alpha);
  } else {
    const auto table = [&] {
      Potential tmp = f;
      tmp.alphabet = alphabet;
      return tabulate(tmp, f.depth);
    }();
    const auto [lo, hi] = std::minmax_element(table.begin(), table.end());
    f.holder_const = cylinder_holder_bound(*hi - *lo, f.depth, min_node_distance(*alphabet), f.holder_alpha);
  }
  f.alphabet = std::move(alphabet);
  return f;
}

Potential coordinate_observable(AlphabetPtr alphabet, int position, std::size_t component) {
  if (position < 1) throw InvalidArgument("coordinate_observable: position is 1-based");
  if (component >= alphabet->dim()) throw InvalidArgument("coordinate_observable: component out of range");
  Potential f;
  f.depth = position;
  f.name = "coordinate[" + std::to_string(position) + "," + std::to_string(component) + "]";
  const Alphabet* a = alphabet.get();
  f.eval = [a, position, component](NodeIndices x) {
    return a->node(x[static_cast<std::size_t>(position - 1)])[component];
  };
  if (!alphabet->coordinate_lipschitz().empty()) {
    const double lip = std::ldexp(alphabet->coordinate_lipschitz()[component], position);
    f.holder_const = lipschitz_to_holder(lip, alphabet->diameter(), f.holder_alpha);
  } else {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < alphabet->size(); ++i) {
      lo = std::min(lo, alphabet->node(i)[component]);
      hi = std::max(hi, alphabet->node(i)[component]);
    }
    f.holder_const = cylinder_holder_bound(hi - lo, position, min_node_distance(*alphabet), f.holder_alpha);
  }
  f.alphabet = std::move(alphabet);
  return f;
}

Potential heisenberg_potential(const ChainWindowPtr& window, double alpha_decay) {
  if (!(alpha_decay > 0.0)) throw InvalidArgument("heisenberg_potential: alpha_decay must be positive");
  const int w = window->window_radius;
  std::vector<double> coupling(window->sites());
  for (int j = -w; j <= w; ++j) coupling[static_cast<std::size_t>(j + w)] = std::exp(-alpha_decay * std::abs(j));

  Potential f;
  f.alphabet = window->alphabet;
  f.depth = 2;
  f.name = "heisenberg-ladder";
  const Alphabet* a = window->alphabet.get();
  f.eval = [a, coupling](NodeIndices x) {
    const auto s1 = a->node(x[0]);
    const auto s2 = a->node(x[1]);
    double e = 0.0;
    for (std::size_t site = 0; site < coupling.size(); ++site) {
      const std::size_t o = 3 * site;
      e += coupling[site] * (s1[o] * s2[o] + s1[o + 1] * s2[o + 1] + s1[o + 2] * s2[o + 2]);
    }
    return e;
  };
  // |s - t| <= min(2, 2^{i+|n|} d) <= 2^{1-a} (2^{i+|n|} d)^a for the spin at
  // row i, column n; summing the two rows gives (K1 + K2) sum_n J(n) 2^{a|n|}.
  const double a_exp = std::min(alpha_decay, 1.0);
  f.holder_alpha = a_exp;
  const double k1 = std::pow(2.0, 1.0 - a_exp) * std::pow(2.0, a_exp);
  const double k2 = std::pow(2.0, 1.0 - a_exp) * std::pow(2.0, 2.0 * a_exp);
  double series = 0.0;
  for (int j = -w; j <= w; ++j) series += std::exp(-alpha_decay * std::abs(j)) * std::pow(2.0, a_exp * std::abs(j));
  f.holder_const = (k1 + k2) * series;
  // sup |sum_{|n|>W} J(n) s.t| <= 2 sum_{n>W} e^{-alpha n}
  f.tail_error = 2.0 * std::exp(-alpha_decay * (w + 1)) / (1.0 - std::exp(-alpha_decay));
  return f;
}

Potential scaled(const Potential& f, double c) {
  Potential g = f;
  g.eval = [inner = f.eval, c](NodeIndices x) { return c * inner(x); };
  g.holder_const = std::abs(c) * f.holder_const;
  g.tail_error = std::abs(c) * f.tail_error;
  return g;
}

Potential shifted(const Potential& f, double c) {
  Potential g = f;
  g.eval = [inner = f.eval, c](NodeIndices x) { return inner(x) + c; };
  return g;
}

Potential linear_combination(double a, const Potential& f, double b, const Potential& g) {
  if (!same_alphabet(f.alphabet, g.alphabet)) throw InvalidArgument("linear_combination: potentials live on different alphabets");
  Potential h;
  h.alphabet = f.alphabet;
  h.depth = std::max(f.depth, g.depth);
  h.holder_alpha = std::min(f.holder_alpha, g.holder_alpha);
  h.holder_const = std::abs(a) * f.holder_const_at(h.holder_alpha) + std::abs(b) * g.holder_const_at(h.holder_alpha);
  h.tail_error = std::abs(a) * f.tail_error + std::abs(b) * g.tail_error;
  h.name = f.name + "+" + g.name;
  h.eval = [a, b, fd = f.depth, gd = g.depth, fe = f.eval, ge = g.eval](NodeIndices x) {
    return a * fe(x.first(static_cast<std::size_t>(fd))) + b * ge(x.first(static_cast<std::size_t>(gd)));
  };
  return h;
}

std::vector<double> tabulate(const Potential& f, int depth) {
  if (depth < f.depth) throw InvalidArgument("tabulate: depth smaller than potential depth");
  const std::size_t n = f.alphabet->size();
  const std::size_t own = ipow(n, f.depth);
  std::vector<double> base(own);
  std::vector<std::size_t> digits(static_cast<std::size_t>(f.depth), 0);
  for (std::size_t idx = 0; idx < own; ++idx) {
    base[idx] = f.eval(digits);
    for (std::size_t s = digits.size(); s-- > 0;) {
      if (++digits[s] < n) break;
      digits[s] = 0;
    }
  }
  if (depth == f.depth) return base;
  const std::size_t repeat = ipow(n, depth - f.depth);
  std::vector<double> out(own * repeat);
  for (std::size_t idx = 0; idx < out.size(); ++idx) out[idx] = base[idx / repeat];
  return out;
}

SeqDistance seq_metric(const Alphabet& alphabet, NodeIndices x, NodeIndices y, int depth) {
  if (depth < 1) throw InvalidArgument("seq_metric: depth must be >= 1");
  const auto k = static_cast<std::size_t>(depth);
  if (x.size() < k || y.size() < k) throw InvalidArgument("seq_metric: sequences shorter than depth");
  SeqDistance d;
  double scale = 1.0;
  for (std::size_t n = 0; n < k; ++n) {
    scale *= 0.5;
    d.value += scale * alphabet.distance(x[n], y[n]);
  }
  d.tail_bound = alphabet.diameter() * scale;
  return d;
}

SequencePotential as_sequence_potential(const Potential& f) {
  SequencePotential s;
  s.alphabet = f.alphabet;
  s.holder_alpha = f.holder_alpha;
  s.holder_const = f.holder_const;
  s.name = f.name;
  s.cylinder_depth = f.depth;
  s.eval = [f](NodeIndices prefix, std::size_t tail) {
    std::vector<std::size_t> x(static_cast<std::size_t>(f.depth), tail);
    std::copy_n(prefix.begin(), std::min(prefix.size(), x.size()), x.begin());
    return f.eval(x);
  };
  return s;
}

std::pair<Potential, TruncationReport> truncate(const SequencePotential& f, int k,
                                                std::optional<std::size_t> anchor) {
  if (k < 1) throw InvalidArgument("truncate: depth must be >= 1");
  const std::size_t a = anchor.value_or(0);
  if (a >= f.alphabet->size()) throw InvalidArgument("truncate: anchor is not a node of the alphabet");
  Potential g;
  g.alphabet = f.alphabet;
  g.depth = k;
  g.holder_alpha = f.holder_alpha;
  g.holder_const = f.holder_const;
  g.name = f.name;
  g.eval = [inner = f.eval, a](NodeIndices x) { return inner(x, a); };
  TruncationReport report;
  report.depth = k;
  report.sup_error_bound = f.holder_const * std::pow(f.alphabet->diameter() * std::ldexp(1.0, -k), f.holder_alpha);
  g.tail_error = report.sup_error_bound;
  return {std::move(g), report};
}

double holder_certificate(const Potential& f, std::size_t samples, std::uint64_t rng_seed) {
  if (samples == 0) throw InvalidArgument("holder_certificate: samples must be >= 1");
  Rng rng(rng_seed);
  const std::size_t n = f.alphabet->size();
  const auto k = static_cast<std::size_t>(f.depth);
  std::vector<std::size_t> x(k);
  std::vector<std::size_t> y(k);
  double worst = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    for (auto& xi : x) xi = rng.below(n);
    // Agree on a random prefix so that close pairs are probed as well.
    const std::size_t first_diff = rng.below(k);
    for (std::size_t i = 0; i < k; ++i) y[i] = i < first_diff ? x[i] : rng.below(n);
    const double d = seq_metric(*f.alphabet, x, y, f.depth).value;
    if (d == 0.0) continue;
    worst = std::max(worst, std::abs(f.eval(x) - f.eval(y)) / std::pow(d, f.holder_alpha));
  }
  return worst;
}

}  // namespace ruelle
