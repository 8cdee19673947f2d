#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "nashseek/rng.hpp"

namespace nashseek {

// Flattened system-state realization; the model defines the layout.
using State = std::vector<double>;

// A game with a random system state: payoff is deterministic given (state,
// actions); the expectation over the state is what equilibrium analysis runs
// on. expected_payoff must be a deterministic function of the actions (an
// analytic form, or Monte Carlo with a fixed internal seed).
class GameModel {
 public:
  virtual ~GameModel() = default;

  virtual std::size_t num_nodes() const = 0;
  virtual State sample_state(Rng& rng) const = 0;
  virtual double payoff(const State& s, std::span<const double> actions,
                        std::size_t node) const = 0;
  virtual double expected_payoff(std::span<const double> actions,
                                 std::size_t node) const = 0;

  // Re-evaluation of the expectation with a caller-chosen seed; models with a
  // sampled expectation override this, analytic models ignore the seed.
  virtual double expected_payoff_seeded(std::span<const double> actions,
                                        std::size_t node, std::uint64_t) const {
    return expected_payoff(actions, node);
  }

  // Standard error of expected_payoff; 0 when the expectation is exact.
  virtual double expectation_stderr(std::span<const double>, std::size_t) const {
    return 0.0;
  }

  // d E[r_node] / d actions[wrt]; default central finite difference.
  virtual double expected_gradient(std::span<const double> actions, std::size_t node,
                                   std::size_t wrt) const {
    const double h = 1e-3 * std::max(1.0, std::abs(actions[wrt]));
    std::vector<double> hi(actions.begin(), actions.end());
    std::vector<double> lo(actions.begin(), actions.end());
    hi[wrt] += h;
    lo[wrt] -= h;
    return (expected_payoff(hi, node) - expected_payoff(lo, node)) / (2.0 * h);
  }

  virtual bool is_stochastic() const { return true; }
};

}  // namespace nashseek
