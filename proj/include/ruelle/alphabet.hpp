#pragma once

// Compact metric alphabets (M, d) together with a finite quadrature rule that
// stands in for the a priori probability measure on M.

#include <cmath>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ruelle {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
  Vec3& operator+=(Vec3 b) {
    x += b.x;
    y += b.y;
    z += b.z;
    return *this;
  }
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }
inline Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

/// Nodes (stored node-major, `dim` coordinates each) and nonnegative weights
/// summing to one.
struct QuadratureRule {
  std::size_t dim = 1;
  std::vector<double> coords;
  std::vector<double> weights;
  std::string degree_info;

  std::size_t size() const { return weights.size(); }
  std::span<const double> node(std::size_t i) const {
    return std::span<const double>(coords).subspan(i * dim, dim);
  }
};

using NodeMetric = std::function<double(std::span<const double>, std::span<const double>)>;

class Alphabet {
 public:
  /// `coordinate_lipschitz[c]` bounds |x[c] - y[c]| / d(x, y) over node pairs;
  /// left empty when no such bound is known.
  Alphabet(std::string name, QuadratureRule rule, NodeMetric metric, double diameter,
           std::vector<double> coordinate_lipschitz = {});

  const std::string& name() const { return name_; }
  const QuadratureRule& rule() const { return rule_; }
  std::size_t size() const { return rule_.size(); }
  std::size_t dim() const { return rule_.dim; }
  std::span<const double> node(std::size_t i) const { return rule_.node(i); }
  double weight(std::size_t i) const { return rule_.weights[i]; }
  std::span<const double> weights() const { return rule_.weights; }
  double distance(std::size_t i, std::size_t j) const { return metric_(node(i), node(j)); }
  const NodeMetric& metric() const { return metric_; }
  double diameter() const { return diameter_; }
  std::span<const double> coordinate_lipschitz() const { return coordinate_lipschitz_; }

 private:
  std::string name_;
  QuadratureRule rule_;
  NodeMetric metric_;
  double diameter_;
  std::vector<double> coordinate_lipschitz_;
};

using AlphabetPtr = std::shared_ptr<const Alphabet>;

/// Identical instance, or the same name, nodes and weights.
bool same_alphabet(const AlphabetPtr& a, const AlphabetPtr& b);

/// Gauss-Legendre nodes and weights on [-1, 1] (weights sum to 2).
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussLegendreRule gauss_legendre(std::size_t n);

/// {0, ..., n-1} with the normalized counting measure and the discrete metric.
AlphabetPtr make_finite_alphabet(std::size_t n);

/// S^1 with the periodic trapezoid rule; coordinates (cos t, sin t), chordal metric.
AlphabetPtr make_circle_alphabet(std::size_t n_nodes);

/// S^2 with Gauss-Legendre in cos(theta) times an equispaced azimuth; chordal metric.
AlphabetPtr make_sphere_alphabet(std::size_t n_polar, std::size_t n_azimuth);

/// The six octahedral directions +-e_i with equal weights (a spherical 3-design).
AlphabetPtr make_octahedral_alphabet();

inline constexpr std::size_t kDefaultProductBudget = 1'000'000;

/// Windowed chain alphabet: nodes are tuples (s_{-W}, ..., s_W) of base sphere
/// nodes, weighted by the free-boundary nearest-neighbour Gibbs factor
/// exp(beta * sum_i s_i . s_{i+1}) times the product of base weights.
struct ChainWindowAlphabet {
  AlphabetPtr base;
  int window_radius = 0;
  double beta = 0.0;
  double log_partition = 0.0;
  /// Product alphabet. Coordinates of a node are the 3(2W+1) spin components
  /// in site order; the metric is sum_j 2^{-|j|} |s_j - t_j|.
  AlphabetPtr alphabet;
  /// Base-node index tuples, node-major, 2W+1 entries per node.
  std::vector<std::size_t> base_indices;

  std::size_t sites() const { return static_cast<std::size_t>(2 * window_radius + 1); }
  /// Spin at window site `j` in [-W, W] of product node `node`.
  Vec3 spin(std::size_t node, int j) const;
};

using ChainWindowPtr = std::shared_ptr<const ChainWindowAlphabet>;

ChainWindowPtr make_chain_window_alphabet(AlphabetPtr base, int window_radius, double beta,
                                          std::size_t budget = kDefaultProductBudget);

double integrate(const QuadratureRule& rule,
                 const std::function<double(std::span<const double>)>& g);
/// Same, with `g` already tabulated on the nodes.
double integrate(const QuadratureRule& rule, std::span<const double> values);

/// CSV with columns index, x0, x1, ..., weight.
void write_alphabet_csv(std::ostream& out, const Alphabet& alphabet);

}  // namespace ruelle
