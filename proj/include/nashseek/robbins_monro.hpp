#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "nashseek/game_model.hpp"
#include "nashseek/perturbation.hpp"
#include "nashseek/rng.hpp"
#include "nashseek/seeker.hpp"
#include "nashseek/stats.hpp"

namespace nashseek {

// Split of one iteration's update direction into drift + martingale noise:
//   drift_j = z_j b_j sin(Omega_j clock + phi_j) E[r_j(S, a)]
//   noise_j = z_j b_j sin(...) (payoff_j - E[r_j(S, a)])
// realized_j = drift_j + noise_j is the direction the iterate actually moved
// along (before the learning rate).
struct RmTerms {
  std::vector<double> drift, noise, realized;
};

// expectation_seed: when set, the model's expectation is re-evaluated with
// that seed (meaningful for Monte-Carlo expectations; ignored otherwise).
inline RmTerms rm_decompose(const TrajectoryRecord& rec, const GameModel& model,
                            const PerturbationParams& p,
                            std::optional<std::uint64_t> expectation_seed = {}) {
  const std::size_t n = rec.actions.size();
  RmTerms out;
  out.drift.resize(n);
  out.noise.resize(n);
  out.realized.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double w = p.growth[j] * p.signal(j, rec.clock);
    const double e = expectation_seed
                         ? model.expected_payoff_seeded(rec.actions, j, *expectation_seed)
                         : model.expected_payoff(rec.actions, j);
    if (!std::isfinite(e)) throw NumericalAbort("non-finite expected payoff", j, rec.k);
    out.drift[j] = w * e;
    out.noise[j] = w * (rec.payoffs[j] - e);
    out.realized[j] = w * rec.payoffs[j];
  }
  return out;
}

// Cumulative noise xi_t = sum_{m < t} rate_m * noise_{m+1}, one vector per
// t = 0 .. records. xi_0 = 0.
inline std::vector<std::vector<double>> cumulative_noise(
    const Trajectory& traj, const GameModel& model, const PerturbationParams& p,
    std::optional<std::uint64_t> reseed_base = {}) {
  const std::size_t n = traj.nodes;
  std::vector<std::vector<double>> xi;
  xi.reserve(traj.records.size() + 1);
  xi.emplace_back(n, 0.0);
  for (const auto& rec : traj.records) {
    const auto terms = rm_decompose(
        rec, model, p,
        reseed_base ? std::optional<std::uint64_t>(mix_seed(*reseed_base, rec.k))
                    : std::nullopt);
    std::vector<double> next = xi.back();
    for (std::size_t j = 0; j < n; ++j) next[j] += rec.rate * terms.noise[j];
    xi.push_back(std::move(next));
  }
  return xi;
}

// sup over the tail of ||xi_{t+k} - xi_t||.
inline double sup_noise_increment(const std::vector<std::vector<double>>& xi,
                                  std::size_t t) {
  if (t >= xi.size()) throw std::invalid_argument("sup_noise_increment: t out of range");
  double worst = 0.0;
  for (std::size_t m = t; m < xi.size(); ++m)
    worst = std::max(worst, l2_distance(xi[m], xi[t]));
  return worst;
}

struct MartingaleReport {
  std::vector<double> mean;        // per-node running mean of the noise term
  std::vector<double> stderr_;     // per-node standard error of that mean
  std::vector<bool> mean_zero_ok;  // |mean| <= 3 * stderr
  bool all_mean_zero_ok = true;
  double ratio_max = 0.0;          // max_k ||noise_{k+1}||^2 / (1 + ||a_k||^2)
  std::size_t iterations = 0;
};

struct MartingaleOptions {
  // Re-derive the expectation seed per iteration (mix(base, k)). Keeps a
  // Monte-Carlo expectation's error independent across iterations instead of
  // frozen and dither-correlated. No effect on exact expectations.
  std::optional<std::uint64_t> reseed_base;
};

inline MartingaleReport martingale_diagnostics(const Trajectory& traj,
                                               const GameModel& model,
                                               const PerturbationParams& p,
                                               const MartingaleOptions& opts = {}) {
  if (traj.records.empty())
    throw std::invalid_argument("martingale diagnostics: empty trajectory");
  const std::size_t n = traj.nodes;
  std::vector<RunningStats> stats(n);
  MartingaleReport rep;
  rep.iterations = traj.records.size();
  for (const auto& rec : traj.records) {
    const auto terms = rm_decompose(
        rec, model, p,
        opts.reseed_base ? std::optional<std::uint64_t>(mix_seed(*opts.reseed_base, rec.k))
                         : std::nullopt);
    double noise2 = 0.0, act2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      stats[j].push(terms.noise[j]);
      noise2 += terms.noise[j] * terms.noise[j];
      act2 += rec.actions[j] * rec.actions[j];
    }
    rep.ratio_max = std::max(rep.ratio_max, noise2 / (1.0 + act2));
  }
  rep.mean.resize(n);
  rep.stderr_.resize(n);
  rep.mean_zero_ok.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    rep.mean[j] = stats[j].mean();
    rep.stderr_[j] = stats[j].stderr_mean();
    rep.mean_zero_ok[j] = std::abs(rep.mean[j]) <= 3.0 * rep.stderr_[j];
    if (!rep.mean_zero_ok[j]) rep.all_mean_zero_ok = false;
  }
  return rep;
}

}  // namespace nashseek
