#pragma once

// Heisenberg-type ladder on N x Z at finite volume: exact sampling of the
// free-boundary chain measure, single-site heat-bath dynamics for the ladder
// Gibbs measure, two-point estimation, and the transfer-operator cross-check.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ruelle/alphabet.hpp"
#include "ruelle/rng.hpp"

namespace ruelle {

/// Langevin function coth(b) - 1/b, with the series near zero.
double langevin(double beta);

Vec3 sample_uniform_sphere(Rng& rng);

/// Exact draw from the density proportional to exp(beta s.t) on S^2.
Vec3 sample_kernel(Vec3 s, double beta, Rng& rng);

struct ChainConfig {
  int window_radius = 0;
  std::vector<Vec3> spins;  // sites -W..W

  Vec3 at(int j) const { return spins[static_cast<std::size_t>(j + window_radius)]; }
};

/// First site uniform, then s_{i+1} ~ sample_kernel(s_i, beta).
ChainConfig sample_chain(double beta, int window_radius, Rng& rng);

struct Rotation {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};
  static Rotation axis_angle(Vec3 axis, double angle);
  Vec3 operator()(Vec3 v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z, m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }
};

/// Rows 1..R (stored 0..R-1) of 2W+1 spins. Log-weight
///   beta_row sum_{i,n} s_{(i,n)}.s_{(i,n+1)} + beta_cross sum_{i,n} e^{-alpha|n|} s_{(i,n)}.s_{(i+1,n)}.
struct LadderState {
  int rows = 2;
  int window_radius = 0;
  double beta_row = 0.0;
  double beta_cross = 0.0;
  double alpha_decay = 1.0;
  std::vector<Vec3> spins;

  std::size_t site(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(2 * window_radius + 1) +
           static_cast<std::size_t>(col + window_radius);
  }
  Vec3& at(int row, int col) { return spins[site(row, col)]; }
  Vec3 at(int row, int col) const { return spins[site(row, col)]; }
};

/// Same beta within and across rows. Spins start iid uniform.
LadderState make_ladder_state(int rows, int window_radius, double beta, double alpha_decay, Rng& rng);

double ladder_log_weight(const LadderState& state);
Vec3 local_field(const LadderState& state, int row, int col);

/// log density (w.r.t. the uniform probability on S^2) of the heat-bath move
/// resampling (row, col) to `proposal`.
double heat_bath_log_density(const LadderState& state, int row, int col, Vec3 proposal);

/// `sweeps` sequential heat-bath sweeps in row-major site order.
void ladder_heat_bath(LadderState& state, long sweeps, Rng& rng);

LadderState rotated(const LadderState& state, const Rotation& r);

struct LadderRunOptions {
  long burn_in = 20'000;
  long sweeps = 200'000;
  int measure_every = 5;
  int column = 0;
  int n_max = 4;
  int chains = 1;
  std::uint64_t seed = 1;
};

/// One row per measurement: chain, sweep, energy (-log-weight), overlap
/// s_{(1,m)}.s_{(2,m)} and the three components of s_{(1,m)}.
using LadderStream = std::function<void(int chain, long sweep, double energy, double overlap, Vec3 spin)>;

/// Per-chain measurement series, column m fixed.
struct LadderSamples {
  int n_max = 0;
  int column = 0;
  std::uint64_t seed = 0;
  struct Chain {
    std::vector<std::vector<double>> g;            // g[n-1][t] = s_{(1,m)}.s_{(n+1,m)}
    std::array<std::vector<double>, 3> one_point;  // components of s_{(1,m)}
    std::vector<double> energy;
  };
  std::vector<Chain> chains;
  std::vector<LadderState> final_states;  // one per chain

  void record(std::size_t chain, const LadderState& state);
};

LadderSamples run_ladder(const LadderState& initial, const LadderRunOptions& options,
                         const LadderStream& stream = {});

struct TwoPointReport {
  std::vector<int> distances;  // 0..n_max
  std::vector<double> g;
  std::vector<double> g_err;
  double K_beta = 0.0;
  double c_beta = 0.0;
  double c_err = 0.0;
  int fit_points = 0;
  std::array<double, 3> one_point_components{};
  std::array<double, 3> one_point_err{};
  double one_point = 0.0;  // max |component|
  double tau_int = 0.0;
  double ess = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  int chains = 0;
};

inline constexpr double kMinEffectiveSamples = 100.0;
inline constexpr int kJackknifeBlocks = 50;

/// Block-jackknife estimates of g(n) and the log-linear decay fit; raises
/// insufficient-data below 100 effective samples.
TwoPointReport two_point(const LadderSamples& samples, int blocks = kJackknifeBlocks);

/// Convenience over a list of stored states.
TwoPointReport two_point(std::span<const LadderState> states, int column, int n_max);

/// Integrated autocorrelation time with Sokal's automatic window (c = 5).
double integrated_autocorrelation_time(std::span<const double> series);

struct CrosscheckReport {
  double pressure = 0.0;
  double lambda = 0.0;
  double gap_ratio = 0.0;
  double log_partition = 0.0;
  std::size_t alphabet_size = 0;
  double mcmc_tau = 0.0;  // e^{-c_beta}, NaN when MCMC skipped or no fit
  double mcmc_tau_err = 0.0;
  bool agree = false;  // |gap - mcmc_tau| within 3 combined error bars
};

struct CrosscheckOptions {
  double tol = 1e-12;
  std::size_t budget = kDefaultProductBudget;
  int rows = 12;
  LadderRunOptions mcmc{.burn_in = 0, .sweeps = 0};
};

CrosscheckReport ladder_operator_crosscheck(double beta, double alpha_decay, int window_radius, AlphabetPtr base,
                                            const CrosscheckOptions& options = {});

}  // namespace ruelle
