#include "ruelle/alphabet.hpp"

#include <algorithm>
#include <numbers>
#include <numeric>
#include <ostream>
#include <string>

#include "ruelle/errors.hpp"
#include "ruelle/io.hpp"

namespace ruelle {

namespace {

double chordal(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

Vec3 as_vec3(std::span<const double> c) { return {c[0], c[1], c[2]}; }

}  // namespace

Alphabet::Alphabet(std::string name, QuadratureRule rule, NodeMetric metric, double diameter,
                   std::vector<double> coordinate_lipschitz)
    : name_(std::move(name)),
      rule_(std::move(rule)),
      metric_(std::move(metric)),
      diameter_(diameter),
      coordinate_lipschitz_(std::move(coordinate_lipschitz)) {
  if (!coordinate_lipschitz_.empty() && coordinate_lipschitz_.size() != rule_.dim)
    throw InvalidArgument("alphabet '" + name_ + "': one Lipschitz bound per coordinate expected");
  if (rule_.size() == 0) throw InvalidArgument("alphabet '" + name_ + "' has no nodes");
  if (rule_.dim == 0 || rule_.coords.size() != rule_.dim * rule_.size())
    throw InvalidArgument("alphabet '" + name_ + "': coordinate array does not match node count");
  double total = 0.0;
  for (double w : rule_.weights) {
    if (!(w >= 0.0)) throw InvalidArgument("alphabet '" + name_ + "': negative quadrature weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw InvalidArgument("alphabet '" + name_ + "': weights sum to " + io::format_double(total));
  if (!(diameter_ > 0.0)) throw InvalidArgument("alphabet '" + name_ + "': diameter must be positive");
}

GaussLegendreRule gauss_legendre(std::size_t n) {
  if (n == 0) throw InvalidArgument("gauss_legendre: n must be positive");
  GaussLegendreRule rule{std::vector<double>(n), std::vector<double>(n)};
  const double pi = std::numbers::pi;
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = p2;
      }
      // P_n = p1, P_{n-1} = p0
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0;
    double p1 = x;
    for (std::size_t k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
      p0 = p1;
      p1 = p2;
    }
    dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

bool same_alphabet(const AlphabetPtr& a, const AlphabetPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return a->name() == b->name() && a->dim() == b->dim() && a->rule().coords == b->rule().coords &&
         a->rule().weights == b->rule().weights;
}

AlphabetPtr make_finite_alphabet(std::size_t n) {
  if (n == 0) throw InvalidArgument("make_finite_alphabet: n must be >= 1");
  QuadratureRule rule;
  rule.dim = 1;
  rule.coords.resize(n);
  std::iota(rule.coords.begin(), rule.coords.end(), 0.0);
  rule.weights.assign(n, 1.0 / static_cast<double>(n));
  rule.degree_info = "normalized counting measure on " + std::to_string(n) + " symbols";
  auto discrete = [](std::span<const double> a, std::span<const double> b) {
    return a[0] == b[0] ? 0.0 : 1.0;
  };
  return std::make_shared<Alphabet>("finite-" + std::to_string(n), std::move(rule), discrete, 1.0,
                                    std::vector<double>{static_cast<double>(n - 1)});
}

AlphabetPtr make_circle_alphabet(std::size_t n_nodes) {
  if (n_nodes < 2) throw InvalidArgument("make_circle_alphabet: n_nodes must be >= 2");
  QuadratureRule rule;
  rule.dim = 2;
  rule.coords.resize(2 * n_nodes);
  for (std::size_t j = 0; j < n_nodes; ++j) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n_nodes);
    rule.coords[2 * j] = std::cos(theta);
    rule.coords[2 * j + 1] = std::sin(theta);
  }
  rule.weights.assign(n_nodes, 1.0 / static_cast<double>(n_nodes));
  rule.degree_info = "periodic trapezoid, exact for trigonometric polynomials of degree < " +
                     std::to_string(n_nodes);
  return std::make_shared<Alphabet>("circle-" + std::to_string(n_nodes), std::move(rule), chordal, 2.0,
                                    std::vector<double>{1.0, 1.0});
}

AlphabetPtr make_sphere_alphabet(std::size_t n_polar, std::size_t n_azimuth) {
  if (n_polar < 1 || n_azimuth < 2)
    throw InvalidArgument("make_sphere_alphabet: need n_polar >= 1 and n_azimuth >= 2");
  const auto gl = gauss_legendre(n_polar);
  QuadratureRule rule;
  rule.dim = 3;
  rule.coords.reserve(3 * n_polar * n_azimuth);
  rule.weights.reserve(n_polar * n_azimuth);
  for (std::size_t p = 0; p < n_polar; ++p) {
    const double z = gl.nodes[p];
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    for (std::size_t q = 0; q < n_azimuth; ++q) {
      const double phi = 2.0 * std::numbers::pi * static_cast<double>(q) / static_cast<double>(n_azimuth);
      rule.coords.insert(rule.coords.end(), {r * std::cos(phi), r * std::sin(phi), z});
      rule.weights.push_back(0.5 * gl.weights[p] / static_cast<double>(n_azimuth));
    }
  }
  // Renormalize away the last-ulp drift of the Gauss-Legendre weights.
  const double total = std::accumulate(rule.weights.begin(), rule.weights.end(), 0.0);
  for (double& w : rule.weights) w /= total;
  rule.degree_info = "Gauss-Legendre(" + std::to_string(n_polar) + ") x trapezoid(" +
                     std::to_string(n_azimuth) + "): exact for cos-degree <= " +
                     std::to_string(2 * n_polar - 1) + " and azimuthal order < " +
                     std::to_string(n_azimuth);
  return std::make_shared<Alphabet>(
      "sphere-" + std::to_string(n_polar) + "x" + std::to_string(n_azimuth), std::move(rule), chordal, 2.0,
      std::vector<double>{1.0, 1.0, 1.0});
}

AlphabetPtr make_octahedral_alphabet() {
  QuadratureRule rule;
  rule.dim = 3;
  rule.coords = {1, 0, 0, -1, 0, 0, 0, 1, 0, 0, -1, 0, 0, 0, 1, 0, 0, -1};
  rule.weights.assign(6, 1.0 / 6.0);
  rule.degree_info = "octahedral spherical 3-design";
  return std::make_shared<Alphabet>("octahedral", std::move(rule), chordal, 2.0,
                                    std::vector<double>{1.0, 1.0, 1.0});
}

Vec3 ChainWindowAlphabet::spin(std::size_t node, int j) const {
  const std::size_t site = static_cast<std::size_t>(j + window_radius);
  return as_vec3(alphabet->node(node).subspan(3 * site, 3));
}

ChainWindowPtr make_chain_window_alphabet(AlphabetPtr base, int window_radius, double beta,
                                          std::size_t budget) {
  if (!base || base->dim() != 3)
    throw InvalidArgument("make_chain_window_alphabet: base must be a sphere alphabet");
  if (window_radius < 0) throw InvalidArgument("make_chain_window_alphabet: W must be >= 0");
  const std::size_t sites = static_cast<std::size_t>(2 * window_radius + 1);
  const std::size_t n = base->size();
  double requested = 1.0;
  for (std::size_t s = 0; s < sites; ++s) requested *= static_cast<double>(n);
  if (requested > static_cast<double>(budget))
    throw ResourceLimit("chain window product size " + std::to_string(n) + "^" + std::to_string(sites) +
                            " = " + io::format_double(requested) + " exceeds budget " +
                            std::to_string(budget),
                        requested, static_cast<double>(budget));
  const std::size_t count = static_cast<std::size_t>(requested);

  auto window = std::make_shared<ChainWindowAlphabet>();
  window->base = base;
  window->window_radius = window_radius;
  window->beta = beta;
  window->base_indices.resize(count * sites);

  QuadratureRule rule;
  rule.dim = 3 * sites;
  rule.coords.resize(count * rule.dim);
  std::vector<double> log_w(count);
  std::vector<std::size_t> digits(sites, 0);
  for (std::size_t node = 0; node < count; ++node) {
    double lw = 0.0;
    for (std::size_t s = 0; s < sites; ++s) {
      window->base_indices[node * sites + s] = digits[s];
      const auto c = base->node(digits[s]);
      std::copy(c.begin(), c.end(), rule.coords.begin() + static_cast<std::ptrdiff_t>(node * rule.dim + 3 * s));
      lw += std::log(base->weight(digits[s]));
      if (s > 0) lw += beta * dot(as_vec3(base->node(digits[s - 1])), as_vec3(c));
    }
    log_w[node] = lw;
    for (std::size_t s = sites; s-- > 0;) {
      if (++digits[s] < n) break;
      digits[s] = 0;
    }
  }
  const double shift = *std::max_element(log_w.begin(), log_w.end());
  double z = 0.0;
  for (double lw : log_w) z += std::exp(lw - shift);
  window->log_partition = sites == 1 ? 0.0 : shift + std::log(z);
  rule.weights.resize(count);
  for (std::size_t node = 0; node < count; ++node) rule.weights[node] = std::exp(log_w[node] - shift) / z;
  rule.degree_info = "free-boundary chain window W=" + std::to_string(window_radius) + " over " + base->name();

  std::vector<double> site_scale(sites);
  std::vector<double> lipschitz(3 * sites);
  double diameter = 0.0;
  for (std::size_t s = 0; s < sites; ++s) {
    site_scale[s] = std::ldexp(1.0, -std::abs(static_cast<int>(s) - window_radius));
    diameter += 2.0 * site_scale[s];
    for (std::size_t c = 0; c < 3; ++c) lipschitz[3 * s + c] = 1.0 / site_scale[s];
  }
  auto metric = [site_scale](std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t s = 0; s < site_scale.size(); ++s)
      d += site_scale[s] * chordal(a.subspan(3 * s, 3), b.subspan(3 * s, 3));
    return d;
  };
  window->alphabet = std::make_shared<Alphabet>(
      "chain-window-W" + std::to_string(window_radius) + "-" + base->name(), std::move(rule), metric, diameter,
      std::move(lipschitz));
  return window;
}

double integrate(const QuadratureRule& rule, const std::function<double(std::span<const double>)>& g) {
  double s = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) s += rule.weights[i] * g(rule.node(i));
  return s;
}

double integrate(const QuadratureRule& rule, std::span<const double> values) {
  if (values.size() != rule.size()) throw InvalidArgument("integrate: value count does not match node count");
  double s = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) s += rule.weights[i] * values[i];
  return s;
}

void write_alphabet_csv(std::ostream& out, const Alphabet& alphabet) {
  std::vector<std::string> header{"index"};
  for (std::size_t c = 0; c < alphabet.dim(); ++c) header.push_back("x" + std::to_string(c));
  header.emplace_back("weight");
  io::CsvWriter csv(out, header);
  for (std::size_t i = 0; i < alphabet.size(); ++i) {
    csv.cell(static_cast<long long>(i));
    for (double c : alphabet.node(i)) csv.cell(c);
    csv.cell(alphabet.weight(i)).end_row();
  }
}

}  // namespace ruelle
