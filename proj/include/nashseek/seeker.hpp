#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nashseek/game_model.hpp"
#include "nashseek/perturbation.hpp"
#include "nashseek/rng.hpp"
#include "nashseek/schedule.hpp"

namespace nashseek {

class NumericalAbort : public std::runtime_error {
 public:
  NumericalAbort(const std::string& what, std::size_t node, std::size_t iteration)
      : std::runtime_error(what + " (node " + std::to_string(node) + ", iteration " +
                           std::to_string(iteration) + ")"),
        node_(node),
        iteration_(iteration) {}
  std::size_t node() const { return node_; }
  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t node_, iteration_;
};

struct SeekerConfig {
  PerturbationParams perturbation;
  StepSchedule schedule;
  std::size_t horizon = 0;            // number of updates; horizon+1 records
  std::vector<double> initial;        // intermediary values at k = 0
  std::uint64_t seed = 1;
  bool clamp_nonnegative = false;     // optional projection of actions onto [0, inf)

  void validate(std::size_t model_nodes) const {
    perturbation.validate();
    schedule.validate();
    if (perturbation.nodes() != model_nodes)
      throw std::invalid_argument("seeker: perturbation node count != model node count");
    if (initial.size() != model_nodes)
      throw std::invalid_argument("seeker: initial vector size != model node count");
    for (double v : initial)
      if (!std::isfinite(v)) throw std::invalid_argument("seeker: non-finite initial value");
  }
};

// One record per iteration. `payoffs` holds the realizations observed after
// performing `actions` (in paper time, the values arriving at k+1); the
// update from record k to k+1 is
//   intermediary[k+1] = intermediary[k] + rate_k * z_j * signal_j(clock_k) * payoffs[k].
struct TrajectoryRecord {
  std::size_t k = 0;
  double clock = 0.0;                 // cumulative time khat at this iteration
  std::vector<double> intermediary;   // dither-free values
  std::vector<double> actions;        // intermediary + dither (post-clamp if enabled)
  std::vector<double> payoffs;        // realized payoffs at `actions`
  double rate = 0.0;                  // learning rate used by this iteration's update
};

struct Trajectory {
  std::size_t nodes = 0;
  std::vector<TrajectoryRecord> records;

  std::size_t iterations() const { return records.empty() ? 0 : records.size() - 1; }

  // Mean of the intermediary values over the final `window` records.
  std::vector<double> windowed_mean(std::size_t window) const {
    if (records.empty() || window == 0 || window > records.size())
      throw std::invalid_argument("windowed_mean: bad window");
    std::vector<double> m(nodes, 0.0);
    for (std::size_t i = records.size() - window; i < records.size(); ++i)
      for (std::size_t j = 0; j < nodes; ++j) m[j] += records[i].intermediary[j];
    for (auto& v : m) v /= static_cast<double>(window);
    return m;
  }
};

// Intermediary update: v_j += rate * z_j * b_j sin(Omega_j clock + phi_j) * payoff_j.
inline std::vector<double> seeker_step(std::span<const double> intermediary, double clock,
                                       double rate, std::span<const double> payoffs,
                                       const PerturbationParams& p) {
  std::vector<double> next(intermediary.begin(), intermediary.end());
  for (std::size_t j = 0; j < next.size(); ++j)
    next[j] += rate * p.growth[j] * p.signal(j, clock) * payoffs[j];
  return next;
}

// At each iteration: form the action by adding the dither at the current
// clock, perform it (one shared state draw; every node sees only its own
// payoff), then move the intermediary along dither * payoff. One iteration
// uses a single clock value in both the action and the update.
inline Trajectory run_seeker(const GameModel& model, const SeekerConfig& cfg) {
  cfg.validate(model.num_nodes());
  const std::size_t n = model.num_nodes();
  Trajectory traj;
  traj.nodes = n;
  traj.records.reserve(cfg.horizon + 1);

  Rng rng = make_rng(cfg.seed, 0x53454bu);
  std::vector<double> intermediary = cfg.initial;
  double clock = 0.0;

  for (std::size_t k = 0; k <= cfg.horizon; ++k) {
    TrajectoryRecord rec;
    rec.k = k;
    rec.clock = clock;
    rec.intermediary = intermediary;
    rec.actions.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      double a = intermediary[j] + cfg.perturbation.signal(j, clock);
      if (cfg.clamp_nonnegative) a = std::max(a, 0.0);
      rec.actions[j] = a;
    }
    const State state = model.sample_state(rng);
    rec.payoffs.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double r = model.payoff(state, rec.actions, j);
      if (!std::isfinite(r)) throw NumericalAbort("non-finite payoff", j, k);
      rec.payoffs[j] = r;
    }
    rec.rate = cfg.schedule.lambda(k);
    traj.records.push_back(std::move(rec));

    if (k < cfg.horizon) {
      const auto& cur = traj.records.back();
      intermediary = seeker_step(intermediary, clock, cur.rate, cur.payoffs,
                                 cfg.perturbation);
      for (std::size_t j = 0; j < n; ++j)
        if (!std::isfinite(intermediary[j]))
          throw NumericalAbort("non-finite intermediary value", j, k + 1);
      clock += cfg.schedule.lambda(k + 1);
    }
  }
  return traj;
}

// Oracle-gradient projected ascent baseline: a_{k+1} = proj_[0,max] {a_k +
// rate_k * dE[r_j]/da_j}. Runs on the model's expected gradient; produced for
// comparison plots, so records mirror the seeker layout with actions ==
// intermediary and expected payoffs in the payoff slots.
inline Trajectory baseline_gradient_ascent(const GameModel& model,
                                           const StepSchedule& schedule,
                                           std::span<const double> start,
                                           double action_max, std::size_t horizon) {
  schedule.validate();
  const std::size_t n = model.num_nodes();
  if (start.size() != n)
    throw std::invalid_argument("baseline: start size != model node count");
  if (!(action_max > 0.0)) throw std::invalid_argument("baseline: action_max must be > 0");

  Trajectory traj;
  traj.nodes = n;
  traj.records.reserve(horizon + 1);
  std::vector<double> a(start.begin(), start.end());
  for (auto& v : a) v = std::clamp(v, 0.0, action_max);
  double clock = 0.0;

  for (std::size_t k = 0; k <= horizon; ++k) {
    TrajectoryRecord rec;
    rec.k = k;
    rec.clock = clock;
    rec.intermediary = a;
    rec.actions = a;
    rec.payoffs.resize(n);
    for (std::size_t j = 0; j < n; ++j) rec.payoffs[j] = model.expected_payoff(a, j);
    rec.rate = schedule.lambda(k);
    traj.records.push_back(std::move(rec));

    if (k < horizon) {
      std::vector<double> next(n);
      for (std::size_t j = 0; j < n; ++j) {
        const double g = model.expected_gradient(a, j, j);
        if (!std::isfinite(g)) throw NumericalAbort("non-finite gradient", j, k);
        next[j] = std::clamp(a[j] + traj.records.back().rate * g, 0.0, action_max);
      }
      a = std::move(next);
      clock += schedule.lambda(k + 1);
    }
  }
  return traj;
}

}  // namespace nashseek
