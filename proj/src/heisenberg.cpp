#include "ruelle/heisenberg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include "ruelle/errors.hpp"
#include "ruelle/potential.hpp"
#include "ruelle/transfer.hpp"

namespace ruelle {

namespace {

Vec3 normalized(Vec3 v) { return (1.0 / norm(v)) * v; }

// log(sinh b / b), stable at both ends.
double log_sinhc(double b) {
  if (b < 1e-4) return b * b / 6.0;
  return b + std::log1p(-std::exp(-2.0 * b)) - std::log(2.0 * b);
}

struct WeightedFit {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
};

WeightedFit weighted_line(std::span<const double> x, std::span<const double> y, std::span<const double> w) {
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
    sxx += w[i] * x[i] * x[i];
    sxy += w[i] * x[i] * y[i];
  }
  WeightedFit f;
  const double det = sw * sxx - sx * sx;
  if (x.size() < 2 || det == 0.0) return f;
  f.slope = (sw * sxy - sx * sy) / det;
  f.intercept = (sy - f.slope * sx) / sw;
  return f;
}

}  // namespace

double langevin(double beta) {
  if (std::abs(beta) < 1.0) {
    // (b cosh b - sinh b) / (b sinh b) with both series summed termwise;
    // the numerator's terms are all of one sign, so nothing cancels.
    double term = beta, num = 0.0, sinh_b = beta;
    for (int k = 1; k <= 12; ++k) {
      term *= beta * beta / ((2.0 * k) * (2.0 * k + 1.0));
      num += 2.0 * k * term;
      sinh_b += term;
    }
    return beta == 0.0 ? 0.0 : num / (beta * sinh_b);
  }
  return 1.0 / std::tanh(beta) - 1.0 / beta;
}

Vec3 sample_uniform_sphere(Rng& rng) {
  const double z = 2.0 * rng.uniform() - 1.0;
  const double phi = 2.0 * std::numbers::pi * rng.uniform();
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return normalized({r * std::cos(phi), r * std::sin(phi), z});
}

Vec3 sample_kernel(Vec3 s, double beta, Rng& rng) {
  if (beta < 0.0) throw InvalidArgument("sample_kernel: beta must be >= 0 (use -s for antiferromagnetic)");
  if (beta == 0.0) return sample_uniform_sphere(rng);
  // Inverse CDF of c = s.t, written as 1 + log(u + (1-u) e^{-2 beta}) / beta.
  const double u = 1.0 - rng.uniform();
  double c = 1.0 + std::log1p((1.0 - u) * std::expm1(-2.0 * beta)) / beta;
  c = std::clamp(c, -1.0, 1.0);
  const double phi = 2.0 * std::numbers::pi * rng.uniform();
  const Vec3 helper = std::abs(s.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  const Vec3 e1 = normalized(cross(s, helper));
  const Vec3 e2 = cross(s, e1);
  const double r = std::sqrt(std::max(0.0, 1.0 - c * c));
  return normalized(c * s + (r * std::cos(phi)) * e1 + (r * std::sin(phi)) * e2);
}

ChainConfig sample_chain(double beta, int window_radius, Rng& rng) {
  if (window_radius < 0) throw InvalidArgument("sample_chain: W must be >= 0");
  ChainConfig chain;
  chain.window_radius = window_radius;
  chain.spins.resize(static_cast<std::size_t>(2 * window_radius + 1));
  chain.spins[0] = sample_uniform_sphere(rng);
  for (std::size_t i = 1; i < chain.spins.size(); ++i) chain.spins[i] = sample_kernel(chain.spins[i - 1], beta, rng);
  return chain;
}

Rotation Rotation::axis_angle(Vec3 axis, double angle) {
  const Vec3 k = normalized(axis);
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double t = 1.0 - c;
  Rotation r;
  r.m = {c + k.x * k.x * t,       k.x * k.y * t - k.z * s, k.x * k.z * t + k.y * s,
         k.y * k.x * t + k.z * s, c + k.y * k.y * t,       k.y * k.z * t - k.x * s,
         k.z * k.x * t - k.y * s, k.z * k.y * t + k.x * s, c + k.z * k.z * t};
  return r;
}

LadderState make_ladder_state(int rows, int window_radius, double beta, double alpha_decay, Rng& rng) {
  if (rows < 2) throw InvalidArgument("make_ladder_state: need at least 2 rows");
  if (window_radius < 0) throw InvalidArgument("make_ladder_state: W must be >= 0");
  if (beta < 0.0) throw InvalidArgument("make_ladder_state: beta must be >= 0");
  LadderState s;
  s.rows = rows;
  s.window_radius = window_radius;
  s.beta_row = beta;
  s.beta_cross = beta;
  s.alpha_decay = alpha_decay;
  s.spins.resize(static_cast<std::size_t>(rows) * static_cast<std::size_t>(2 * window_radius + 1));
  for (auto& v : s.spins) v = sample_uniform_sphere(rng);
  return s;
}

double ladder_log_weight(const LadderState& s) {
  const int w = s.window_radius;
  double e = 0.0;
  for (int i = 0; i < s.rows; ++i)
    for (int n = -w; n < w; ++n) e += s.beta_row * dot(s.at(i, n), s.at(i, n + 1));
  for (int i = 0; i + 1 < s.rows; ++i)
    for (int n = -w; n <= w; ++n) e += s.beta_cross * std::exp(-s.alpha_decay * std::abs(n)) * dot(s.at(i, n), s.at(i + 1, n));
  return e;
}

Vec3 local_field(const LadderState& s, int row, int col) {
  const int w = s.window_radius;
  Vec3 row_sum;
  if (col > -w) row_sum += s.at(row, col - 1);
  if (col < w) row_sum += s.at(row, col + 1);
  Vec3 cross_sum;
  if (row > 0) cross_sum += s.at(row - 1, col);
  if (row + 1 < s.rows) cross_sum += s.at(row + 1, col);
  return s.beta_row * row_sum + (s.beta_cross * std::exp(-s.alpha_decay * std::abs(col))) * cross_sum;
}

double heat_bath_log_density(const LadderState& s, int row, int col, Vec3 proposal) {
  const Vec3 h = local_field(s, row, col);
  return dot(h, proposal) - log_sinhc(norm(h));
}

void ladder_heat_bath(LadderState& s, long sweeps, Rng& rng) {
  const int w = s.window_radius;
  std::vector<double> cross(static_cast<std::size_t>(2 * w + 1));
  for (int n = -w; n <= w; ++n) cross[static_cast<std::size_t>(n + w)] = s.beta_cross * std::exp(-s.alpha_decay * std::abs(n));
  for (long sweep = 0; sweep < sweeps; ++sweep) {
    for (int i = 0; i < s.rows; ++i) {
      for (int n = -w; n <= w; ++n) {
        Vec3 row_sum;
        if (n > -w) row_sum += s.at(i, n - 1);
        if (n < w) row_sum += s.at(i, n + 1);
        Vec3 cross_sum;
        if (i > 0) cross_sum += s.at(i - 1, n);
        if (i + 1 < s.rows) cross_sum += s.at(i + 1, n);
        const Vec3 h = s.beta_row * row_sum + cross[static_cast<std::size_t>(n + w)] * cross_sum;
        const double b = norm(h);
        s.at(i, n) = b > 0.0 ? sample_kernel((1.0 / b) * h, b, rng) : sample_uniform_sphere(rng);
      }
    }
  }
}

LadderState rotated(const LadderState& state, const Rotation& r) {
  LadderState out = state;
  for (auto& v : out.spins) v = r(v);
  return out;
}

void LadderSamples::record(std::size_t chain, const LadderState& state) {
  if (chain >= chains.size()) chains.resize(chain + 1);
  auto& c = chains[chain];
  if (c.g.size() != static_cast<std::size_t>(n_max)) c.g.resize(static_cast<std::size_t>(n_max));
  const Vec3 first = state.at(0, column);
  for (int n = 1; n <= n_max; ++n) c.g[static_cast<std::size_t>(n - 1)].push_back(dot(first, state.at(n, column)));
  c.one_point[0].push_back(first.x);
  c.one_point[1].push_back(first.y);
  c.one_point[2].push_back(first.z);
  c.energy.push_back(-ladder_log_weight(state));
}

LadderSamples run_ladder(const LadderState& initial, const LadderRunOptions& options, const LadderStream& stream) {
  if (options.n_max < 1 || options.n_max >= initial.rows)
    throw InvalidArgument("run_ladder: n_max must lie in [1, rows - 1]");
  if (std::abs(options.column) > initial.window_radius) throw InvalidArgument("run_ladder: column outside window");
  if (options.chains < 1 || options.measure_every < 1 || options.sweeps < 0 || options.burn_in < 0)
    throw InvalidArgument("run_ladder: invalid run lengths");
  LadderSamples samples;
  samples.n_max = options.n_max;
  samples.column = options.column;
  samples.seed = options.seed;
  samples.chains.resize(static_cast<std::size_t>(options.chains));
  samples.final_states.resize(static_cast<std::size_t>(options.chains));

  Rng master(options.seed);
  std::vector<Rng> streams;
  for (int c = 0; c < options.chains; ++c) streams.push_back(master.split());

  std::vector<std::vector<long>> sweep_ids(static_cast<std::size_t>(options.chains));
  auto run_chain = [&](std::size_t c) {
    LadderState state = initial;
    Rng& rng = streams[c];
    for (auto& v : state.spins) v = sample_uniform_sphere(rng);
    ladder_heat_bath(state, options.burn_in, rng);
    LadderSamples local;
    local.n_max = options.n_max;
    local.column = options.column;
    for (long sweep = 1; sweep <= options.sweeps; ++sweep) {
      ladder_heat_bath(state, 1, rng);
      if (sweep % options.measure_every == 0) {
        local.record(0, state);
        sweep_ids[c].push_back(options.burn_in + sweep);
      }
    }
    if (local.chains.empty()) local.chains.resize(1);
    samples.chains[c] = std::move(local.chains[0]);
    samples.final_states[c] = std::move(state);
  };
  std::vector<std::thread> workers;
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  for (std::size_t c = 0; c < streams.size(); ++c) {
    if (hw > 1 && streams.size() > 1)
      workers.emplace_back(run_chain, c);
    else
      run_chain(c);
  }
  for (auto& t : workers) t.join();

  if (stream) {
    for (std::size_t c = 0; c < samples.chains.size(); ++c) {
      const auto& ch = samples.chains[c];
      for (std::size_t t = 0; t < ch.energy.size(); ++t)
        stream(static_cast<int>(c), sweep_ids[c][t], ch.energy[t], ch.g.empty() ? 0.0 : ch.g[0][t],
               Vec3{ch.one_point[0][t], ch.one_point[1][t], ch.one_point[2][t]});
    }
  }
  return samples;
}

double integrated_autocorrelation_time(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 2) return 0.5;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double c0 = 0.0;
  for (double v : x) c0 += (v - mean) * (v - mean);
  c0 /= static_cast<double>(n);
  if (c0 == 0.0) return 0.5;
  double tau = 0.5;
  for (std::size_t t = 1; t < n; ++t) {
    double ct = 0.0;
    for (std::size_t i = 0; i + t < n; ++i) ct += (x[i] - mean) * (x[i + t] - mean);
    ct /= static_cast<double>(n);
    tau += ct / c0;
    if (static_cast<double>(t) >= 5.0 * tau) break;
  }
  return std::max(tau, 0.5);
}

TwoPointReport two_point(const LadderSamples& samples, int blocks) {
  if (samples.chains.empty() || samples.n_max < 1) throw InsufficientData("two_point: no samples recorded");
  TwoPointReport r;
  r.seed = samples.seed;
  r.chains = static_cast<int>(samples.chains.size());
  const auto n_max = static_cast<std::size_t>(samples.n_max);

  double tau_weighted = 0.0;
  for (const auto& ch : samples.chains) {
    const std::size_t len = ch.g.empty() ? 0 : ch.g[0].size();
    r.samples += len;
    if (len == 0) continue;
    const double tau = integrated_autocorrelation_time(ch.g[0]);
    tau_weighted += tau * static_cast<double>(len);
    r.ess += static_cast<double>(len) / (2.0 * tau);
  }
  r.tau_int = r.samples ? tau_weighted / static_cast<double>(r.samples) : 0.0;
  if (r.ess < kMinEffectiveSamples)
    throw InsufficientData("two_point: effective sample size " + std::to_string(r.ess) + " below 100");

  // Block sums per observable: index 0..n_max-1 for g(n), n_max..n_max+2 for one-point.
  const std::size_t n_obs = n_max + 3;
  const std::size_t per_chain =
      std::max<std::size_t>(2, static_cast<std::size_t>(blocks) / samples.chains.size());
  std::vector<std::vector<double>> block_sum;  // [block][obs]
  std::vector<double> block_count;
  for (const auto& ch : samples.chains) {
    const std::size_t len = ch.g[0].size();
    const std::size_t bsize = len / per_chain;
    if (bsize == 0) continue;
    for (std::size_t b = 0; b < per_chain; ++b) {
      std::vector<double> sums(n_obs, 0.0);
      for (std::size_t t = b * bsize; t < (b + 1) * bsize; ++t) {
        for (std::size_t k = 0; k < n_max; ++k) sums[k] += ch.g[k][t];
        for (std::size_t c = 0; c < 3; ++c) sums[n_max + c] += ch.one_point[c][t];
      }
      block_sum.push_back(std::move(sums));
      block_count.push_back(static_cast<double>(bsize));
    }
  }
  const std::size_t nb = block_sum.size();
  if (nb < 2) throw InsufficientData("two_point: too few samples for blocking");
  std::vector<double> total(n_obs, 0.0);
  double total_count = 0.0;
  for (std::size_t b = 0; b < nb; ++b) {
    for (std::size_t k = 0; k < n_obs; ++k) total[k] += block_sum[b][k];
    total_count += block_count[b];
  }
  // Leave-one-block-out means.
  std::vector<std::vector<double>> loo(nb, std::vector<double>(n_obs));
  for (std::size_t b = 0; b < nb; ++b)
    for (std::size_t k = 0; k < n_obs; ++k) loo[b][k] = (total[k] - block_sum[b][k]) / (total_count - block_count[b]);
  const auto jack_err = [&](const std::vector<double>& values) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss * static_cast<double>(values.size() - 1) / static_cast<double>(values.size()));
  };

  r.distances.push_back(0);
  r.g.push_back(1.0);
  r.g_err.push_back(0.0);
  for (std::size_t k = 0; k < n_obs; ++k) {
    std::vector<double> col(nb);
    for (std::size_t b = 0; b < nb; ++b) col[b] = loo[b][k];
    const double est = total[k] / total_count;
    const double err = jack_err(col);
    if (k < n_max) {
      r.distances.push_back(static_cast<int>(k + 1));
      r.g.push_back(est);
      r.g_err.push_back(err);
    } else {
      r.one_point_components[k - n_max] = est;
      r.one_point_err[k - n_max] = err;
      r.one_point = std::max(r.one_point, std::abs(est));
    }
  }

  // Log-linear fit over the leading run of significant g(n).
  std::vector<double> xs, ys, ws;
  std::vector<std::size_t> used;
  for (std::size_t k = 0; k < n_max; ++k) {
    const double g = r.g[k + 1];
    const double e = r.g_err[k + 1];
    if (!(g > 2.0 * e) || !(e > 0.0)) break;
    xs.push_back(static_cast<double>(k + 1));
    ys.push_back(std::log(g));
    ws.push_back((g / e) * (g / e));
    used.push_back(k);
  }
  r.fit_points = static_cast<int>(xs.size());
  const auto fit = weighted_line(xs, ys, ws);
  r.c_beta = -fit.slope;
  r.K_beta = std::exp(fit.intercept);
  r.c_err = std::numeric_limits<double>::quiet_NaN();
  if (std::isfinite(fit.slope)) {
    std::vector<double> cs;
    for (std::size_t b = 0; b < nb; ++b) {
      std::vector<double> yb;
      for (std::size_t k : used) yb.push_back(loo[b][k] > 0.0 ? std::log(loo[b][k]) : std::numeric_limits<double>::quiet_NaN());
      cs.push_back(-weighted_line(xs, yb, ws).slope);
    }
    r.c_err = jack_err(cs);
  }
  return r;
}

TwoPointReport two_point(std::span<const LadderState> states, int column, int n_max) {
  LadderSamples samples;
  samples.n_max = n_max;
  samples.column = column;
  for (const auto& s : states) samples.record(0, s);
  return two_point(samples);
}

CrosscheckReport ladder_operator_crosscheck(double beta, double alpha_decay, int window_radius, AlphabetPtr base,
                                            const CrosscheckOptions& options) {
  if (window_radius != 0 && window_radius != 1)
    throw InvalidArgument("ladder_operator_crosscheck: W must be 0 or 1");
  const auto window = make_chain_window_alphabet(std::move(base), window_radius, beta, options.budget);
  const TransferOperator op(scaled(heisenberg_potential(window, alpha_decay), beta));
  PowerIterationOptions opts;
  opts.tol = options.tol;
  const auto eig = power_iteration(op, opts);
  CrosscheckReport r;
  r.pressure = eig.log_lambda;
  r.lambda = eig.lambda;
  r.gap_ratio = eig.gap_ratio;
  r.log_partition = window->log_partition;
  r.alphabet_size = window->alphabet->size();
  r.mcmc_tau = std::numeric_limits<double>::quiet_NaN();
  r.mcmc_tau_err = std::numeric_limits<double>::quiet_NaN();
  if (options.mcmc.sweeps > 0) {
    Rng rng(options.mcmc.seed);
    const auto state = make_ladder_state(options.rows, window_radius, beta, alpha_decay, rng);
    const auto tp = two_point(run_ladder(state, options.mcmc));
    if (std::isfinite(tp.c_beta)) {
      r.mcmc_tau = std::exp(-tp.c_beta);
      r.mcmc_tau_err = r.mcmc_tau * tp.c_err;
      r.agree = std::abs(r.gap_ratio - r.mcmc_tau) <= 3.0 * r.mcmc_tau_err;
    }
  }
  return r;
}

}  // namespace ruelle
