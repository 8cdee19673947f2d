#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nashseek/game_model.hpp"
#include "nashseek/rng.hpp"
#include "nashseek/special_functions.hpp"

namespace nashseek {

// Interference channel with N transmitter/receiver pairs. gain_var[i*N+j] is
// E|h_ij|^2 for the link transmitter i -> receiver j; the per-sample gain
// g_ij = |h_ij|^2 is exponential with that mean. Payoff of pair j at powers p:
//   bandwidth * ln(1 + p_j g_jj / (noise_var + sum_{i != j} p_i g_ij)) - price * p_j.
struct WirelessParams {
  std::size_t pairs = 2;
  double bandwidth = 10.0;   // payoff units per log-unit of rate
  double price = 2.0;        // cost per unit transmit power
  double noise_var = 1.0;    // thermal noise power
  std::vector<double> gain_var;  // N*N row-major, E|h_ij|^2

  double gain_mean(std::size_t tx, std::size_t rx) const {
    return gain_var[tx * pairs + rx];
  }

  void validate() const {
    if (pairs == 0) throw std::invalid_argument("wireless: pairs must be >= 1");
    if (gain_var.size() != pairs * pairs)
      throw std::invalid_argument("wireless: gain_var must be pairs x pairs");
    if (!(noise_var > 0.0)) throw std::invalid_argument("wireless: noise_var must be > 0");
    if (!(bandwidth > 0.0)) throw std::invalid_argument("wireless: bandwidth must be > 0");
    if (!(price > 0.0)) throw std::invalid_argument("wireless: price must be > 0");
    for (double v : gain_var)
      if (!(v >= 0.0) || !std::isfinite(v))
        throw std::invalid_argument("wireless: gain variances must be finite and >= 0");
  }

  // Uniform diagonal/cross variance constructor used by most experiments.
  static WirelessParams uniform(std::size_t pairs, double diag_var, double cross_var,
                                double bandwidth, double price, double noise_var) {
    WirelessParams p;
    p.pairs = pairs;
    p.bandwidth = bandwidth;
    p.price = price;
    p.noise_var = noise_var;
    p.gain_var.assign(pairs * pairs, cross_var);
    for (std::size_t j = 0; j < pairs; ++j) p.gain_var[j * pairs + j] = diag_var;
    return p;
  }
};

struct ChannelRealization {
  std::size_t pairs = 0;
  std::vector<std::complex<double>> coeff;  // h_ij, row-major by transmitter
  std::vector<double> gain;                 // g_ij = |h_ij|^2

  double g(std::size_t tx, std::size_t rx) const { return gain[tx * pairs + rx]; }
};

// Circularly-symmetric complex Gaussian draw: total variance split evenly
// between real and imaginary parts, so |h|^2 is exponential with mean = var.
inline ChannelRealization sample_channel(const WirelessParams& params, Rng& rng) {
  ChannelRealization c;
  c.pairs = params.pairs;
  c.coeff.resize(params.pairs * params.pairs);
  c.gain.resize(params.pairs * params.pairs);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < c.coeff.size(); ++i) {
    const double sd = std::sqrt(params.gain_var[i] / 2.0);
    const std::complex<double> h(sd * normal(rng), sd * normal(rng));
    c.coeff[i] = h;
    c.gain[i] = std::norm(h);
  }
  return c;
}

// Payoff of pair `node` at gains `g` (row-major tx -> rx) and powers p.
inline double wireless_payoff(std::span<const double> g, std::span<const double> p,
                              const WirelessParams& params, std::size_t node) {
  const std::size_t n = params.pairs;
  if (!(p[node] >= 0.0))
    throw std::domain_error("wireless payoff: negative power at node " +
                            std::to_string(node));
  double interference = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == node) continue;
    if (!(p[i] >= 0.0))
      throw std::domain_error("wireless payoff: negative power at node " +
                              std::to_string(i));
    interference += p[i] * g[i * n + node];
  }
  const double sinr = p[node] * g[node * n + node] / (params.noise_var + interference);
  return params.bandwidth * std::log1p(sinr) - params.price * p[node];
}

// d payoff / d own power for one gain realization.
inline double wireless_payoff_own_derivative(std::span<const double> g,
                                             std::span<const double> p,
                                             const WirelessParams& params,
                                             std::size_t node) {
  const std::size_t n = params.pairs;
  double interference = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (i != node) interference += p[i] * g[i * n + node];
  const double own = g[node * n + node];
  return params.bandwidth * own / (params.noise_var + interference + p[node] * own) -
         params.price;
}

class EquilibriumError : public std::runtime_error {
 public:
  enum class Kind { Singular, NonpositiveTarget, NegativeSolution, ResidualCheck };
  EquilibriumError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

namespace detail {

// Dense solve by partial-pivot elimination; the systems here are tiny and
// diagonally dominant whenever the dominance condition holds.
inline std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    if (std::abs(a[piv * n + col]) < 1e-300)
      throw EquilibriumError(EquilibriumError::Kind::Singular,
                             "equilibrium system is singular");
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[piv * n + c], a[col * n + c]);
      std::swap(b[piv], b[col]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    double acc = b[r];
    for (std::size_t c = r + 1; c < n; ++c) acc -= a[r * n + c] * x[c];
    x[r] = acc / a[r * n + r];
  }
  return x;
}

}  // namespace detail

// First-order system of the mean-field equilibrium: row j reads
//   sum_{i} gbar_{i,j} p_i = bandwidth * gbar_{j,j} / price - noise_var,
// i.e. the matrix is the transposed mean-gain layout (column = transmitter).
struct EquilibriumSystem {
  std::vector<double> matrix;  // row-major, row = receiver j, col = transmitter i
  std::vector<double> target;
};

inline EquilibriumSystem equilibrium_system(const WirelessParams& params) {
  params.validate();
  const std::size_t n = params.pairs;
  EquilibriumSystem sys;
  sys.matrix.resize(n * n);
  sys.target.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) sys.matrix[j * n + i] = params.gain_mean(i, j);
    sys.target[j] = params.bandwidth * params.gain_mean(j, j) / params.price -
                    params.noise_var;
  }
  return sys;
}

// Mean-field equilibrium powers. Requires a strictly positive target vector
// (bandwidth * gbar_jj > price * noise_var), an invertible system, and a
// positive solution; the solve is verified against its residual.
inline std::vector<double> analytic_equilibrium(const WirelessParams& params) {
  const auto sys = equilibrium_system(params);
  const std::size_t n = params.pairs;
  for (std::size_t j = 0; j < n; ++j) {
    if (!(sys.target[j] > 0.0)) {
      std::ostringstream os;
      os << "nonpositive target at node " << j
         << ": bandwidth*gain_mean/price - noise_var = " << sys.target[j];
      throw EquilibriumError(EquilibriumError::Kind::NonpositiveTarget, os.str());
    }
  }
  const auto p = detail::solve_dense(sys.matrix, sys.target);
  double resid2 = 0.0, target2 = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double row = 0.0;
    for (std::size_t i = 0; i < n; ++i) row += sys.matrix[j * n + i] * p[i];
    const double r = row - sys.target[j];
    resid2 += r * r;
    target2 += sys.target[j] * sys.target[j];
  }
  if (!(std::sqrt(resid2) <= 1e-10 * std::sqrt(target2)))
    throw EquilibriumError(EquilibriumError::Kind::ResidualCheck,
                           "equilibrium solve residual exceeds 1e-10 relative");
  for (std::size_t j = 0; j < n; ++j)
    if (!(p[j] > 0.0))
      throw EquilibriumError(EquilibriumError::Kind::NegativeSolution,
                             "equilibrium power nonpositive at node " + std::to_string(j));
  return p;
}

struct DominanceReport {
  bool ok = true;
  std::vector<double> margins;  // gbar_jj - sum_{i != j} gbar_ij per receiver row
};

inline DominanceReport diagonal_dominance_check(const WirelessParams& params) {
  params.validate();
  DominanceReport rep;
  const std::size_t n = params.pairs;
  rep.margins.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (i != j) off += params.gain_mean(i, j);
    rep.margins[j] = params.gain_mean(j, j) - off;
    if (!(rep.margins[j] > 0.0)) rep.ok = false;
  }
  return rep;
}

// How the expected payoff is evaluated:
//   Exact     - hypoexponential closed form (partial fractions + E1), exact
//               for the Rayleigh channel to ~1e-13.
//   MeanField - gains replaced by their means inside the payoff; the
//               approximation behind analytic_equilibrium. Labeled approximate.
//   MonteCarlo- sample mean over mc_samples draws, deterministic via an
//               internal fixed seed.
enum class ExpectationMode { Exact, MeanField, MonteCarlo };

inline std::string to_string(ExpectationMode m) {
  switch (m) {
    case ExpectationMode::Exact: return "exact";
    case ExpectationMode::MeanField: return "mean_field";
    default: return "monte_carlo";
  }
}

class WirelessGame final : public GameModel {
 public:
  explicit WirelessGame(WirelessParams params,
                        ExpectationMode mode = ExpectationMode::Exact,
                        std::size_t mc_samples = 2000,
                        std::uint64_t mc_seed = 0x6e617368u,
                        bool frozen_channel = false)
      : params_(std::move(params)),
        mode_(mode),
        mc_samples_(mc_samples),
        mc_seed_(mc_seed),
        frozen_(frozen_channel) {
    params_.validate();
  }

  const WirelessParams& params() const { return params_; }
  ExpectationMode mode() const { return mode_; }
  bool frozen_channel() const { return frozen_; }

  std::size_t num_nodes() const override { return params_.pairs; }

  // State layout: the gain matrix, row-major by transmitter.
  State sample_state(Rng& rng) const override {
    if (frozen_) return params_.gain_var;
    return sample_channel(params_, rng).gain;
  }

  double payoff(const State& s, std::span<const double> a, std::size_t j) const override {
    return wireless_payoff(s, a, params_, j);
  }

  double expected_payoff(std::span<const double> a, std::size_t j) const override {
    switch (mode_) {
      case ExpectationMode::Exact: return exact_expectation(a, j);
      case ExpectationMode::MeanField: return wireless_payoff(params_.gain_var, a, params_, j);
      default: return mc_expectation(a, j, mc_seed_, nullptr);
    }
  }

  double expected_payoff_seeded(std::span<const double> a, std::size_t j,
                                std::uint64_t seed) const override {
    if (mode_ == ExpectationMode::MonteCarlo) return mc_expectation(a, j, seed, nullptr);
    return expected_payoff(a, j);
  }

  double expectation_stderr(std::span<const double> a, std::size_t j) const override {
    if (mode_ != ExpectationMode::MonteCarlo) return 0.0;
    double se = 0.0;
    mc_expectation(a, j, mc_seed_, &se);
    return se;
  }

  bool is_stochastic() const override { return !frozen_; }

  // Exact E[payoff] under the exponential-gain law, any expectation mode.
  double exact_expectation(std::span<const double> a, std::size_t j) const {
    const std::size_t n = params_.pairs;
    if (frozen_) return wireless_payoff(params_.gain_var, a, params_, j);
    for (std::size_t i = 0; i < n; ++i)
      if (!(a[i] >= 0.0))
        throw std::domain_error("wireless expectation: negative power at node " +
                                std::to_string(i));
    std::vector<double> interference_scales;
    interference_scales.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
      if (i != j) interference_scales.push_back(a[i] * params_.gain_mean(i, j));
    std::vector<double> full = interference_scales;
    full.push_back(a[j] * params_.gain_mean(j, j));
    const double e_full = expected_log_shifted(params_.noise_var, full);
    const double e_int = expected_log_shifted(params_.noise_var, interference_scales);
    return params_.bandwidth * (e_full - e_int) - params_.price * a[j];
  }

  // Monte-Carlo E[payoff]; gains are drawn directly from the exponential law
  // of |h|^2. Deterministic for a given seed.
  double mc_expectation(std::span<const double> a, std::size_t j, std::uint64_t seed,
                        double* stderr_out) const {
    const std::size_t n = params_.pairs;
    Rng rng = make_rng(seed, 0x4d43);
    std::exponential_distribution<double> unit_exp(1.0);
    std::vector<double> g(n * n);
    double mean = 0.0, m2 = 0.0;
    for (std::size_t s = 0; s < mc_samples_; ++s) {
      for (std::size_t i = 0; i < g.size(); ++i)
        g[i] = params_.gain_var[i] * unit_exp(rng);
      const double v = wireless_payoff(g, a, params_, j);
      const double d = v - mean;
      mean += d / static_cast<double>(s + 1);
      m2 += d * (v - mean);
    }
    if (stderr_out) {
      const double var = mc_samples_ > 1 ? m2 / static_cast<double>(mc_samples_ - 1) : 0.0;
      *stderr_out = std::sqrt(var / static_cast<double>(mc_samples_));
    }
    return mean;
  }

  std::size_t mc_samples() const { return mc_samples_; }
  std::uint64_t mc_seed() const { return mc_seed_; }

 private:
  WirelessParams params_;
  ExpectationMode mode_;
  std::size_t mc_samples_;
  std::uint64_t mc_seed_;
  bool frozen_;
};

}  // namespace nashseek
