#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "nashseek/game_model.hpp"
#include "nashseek/rng.hpp"
#include "nashseek/stats.hpp"

namespace nashseek {

struct Box {
  std::vector<double> lo, hi;

  void validate() const {
    if (lo.size() != hi.size() || lo.empty())
      throw std::invalid_argument("box: lo/hi size mismatch");
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (!(lo[i] <= hi[i]) || !std::isfinite(lo[i]) || !std::isfinite(hi[i]))
        throw std::invalid_argument("box: needs finite lo <= hi");
  }
  std::size_t dim() const { return lo.size(); }
};

// Ingredients of the trajectory-vs-ODE error bound:
//   c_T = ||r(0)|| + L (C0 + ||r(0)|| T) e^{LT},
// with L the drift Lipschitz constant, C0 the almost-sure action bound, T the
// window length and ||r(0)|| the norm of the expected-payoff vector at the
// zero action.
struct BoundConstants {
  double lipschitz = 0.0;         // L
  double action_bound = 0.0;      // C0
  double window = 0.0;            // T
  double payoff_at_zero = 0.0;    // ||r(0)||

  double c_T() const {
    return payoff_at_zero +
           lipschitz * (action_bound + payoff_at_zero * window) *
               std::exp(lipschitz * window);
  }
};

// K e^{LT} + C_T lambda_edge, with K = C_T L sum lambda^2 + sup||delta||.
// lambda_tail_sq_sum is the summed squared rates over the window's tail,
// lambda_edge the free rate at the window's right edge, delta_sup the
// supremum of the cumulative-noise increments. All components are returned so
// either reading of the free rate index can be reassembled.
struct Theorem1Bound {
  double c_T = 0.0;
  double k_term = 0.0;       // C_T L sum lambda^2 + delta_sup
  double drift_part = 0.0;   // C_T L sum lambda^2
  double delta_sup = 0.0;
  double lambda_edge = 0.0;
  double lambda_tail_sq_sum = 0.0;
  double value = 0.0;        // k_term e^{LT} + C_T lambda_edge
};

inline Theorem1Bound theorem1_bound(const BoundConstants& c, double lambda_tail_sq_sum,
                                    double lambda_edge, double delta_sup) {
  if (!std::isfinite(lambda_tail_sq_sum) || lambda_tail_sq_sum < 0.0)
    throw std::invalid_argument("theorem1_bound: tail sum must be finite and >= 0");
  Theorem1Bound b;
  b.c_T = c.c_T();
  b.drift_part = b.c_T * c.lipschitz * lambda_tail_sq_sum;
  b.delta_sup = delta_sup;
  b.k_term = b.drift_part + delta_sup;
  b.lambda_edge = lambda_edge;
  b.lambda_tail_sq_sum = lambda_tail_sq_sum;
  b.value = b.k_term * std::exp(c.lipschitz * c.window) + b.c_T * lambda_edge;
  return b;
}

// Exponential stability envelope applied at time t:
//   y1 = Mbar e^{-mbar t} Delta0 + (eps + max_amplitude^3),
// the order term instantiated at unit constant.
inline double stability_envelope_value(double Mbar, double mbar, double Delta0, double t,
                                       double eps, double max_amplitude) {
  if (!(mbar > 0.0)) throw std::invalid_argument("envelope value: mbar must be > 0");
  if (!(Mbar > 0.0)) throw std::invalid_argument("envelope value: Mbar must be > 0");
  return Mbar * std::exp(-mbar * t) * Delta0 +
         (eps + max_amplitude * max_amplitude * max_amplitude);
}

struct Corollary2Bound {
  double y1 = 0.0;
  double y2 = 0.0;
  double total = 0.0;
};

// Distance-to-equilibrium bound: the envelope term plus the trajectory-vs-ODE
// term y2 = C_T (lambda_edge + L sum lambda^2) + sup||delta||.
inline Corollary2Bound corollary2_bound(double Mbar, double mbar, double Delta0,
                                        double t, double eps, double max_amplitude,
                                        const BoundConstants& c,
                                        double lambda_tail_sq_sum, double lambda_edge,
                                        double delta_sup) {
  Corollary2Bound out;
  out.y1 = stability_envelope_value(Mbar, mbar, Delta0, t, eps, max_amplitude);
  const double c_T = c.c_T();
  out.y2 = c_T * (lambda_edge + c.lipschitz * lambda_tail_sq_sum) + delta_sup;
  out.total = out.y1 + out.y2;
  return out;
}

struct ConvergenceTime {
  double time = 0.0;
  bool already_within = false;  // Delta0 * Mbar < eps: nothing to wait for
};

// T = (1/mbar) ln(Delta0 Mbar / eps); the reached precision is
// (2 eps + max amplitude^3)-close.
inline ConvergenceTime convergence_time(double Delta0, double Mbar, double mbar,
                                        double eps) {
  if (!(mbar > 0.0) || !(Mbar > 0.0) || !(eps > 0.0) || !(Delta0 >= 0.0))
    throw std::invalid_argument("convergence_time: needs positive mbar, Mbar, eps");
  ConvergenceTime out;
  const double ratio = Delta0 * Mbar / eps;
  if (ratio <= 1.0) {
    out.already_within = true;
    return out;
  }
  out.time = std::log(ratio) / mbar;
  return out;
}

struct LipschitzEstimate {
  std::vector<double> per_node;  // max sampled difference quotient per node
  double overall = 0.0;          // max over nodes
};

// Sampled lower estimate of the Lipschitz constant of a -> E[r_j(S, a)]:
// the largest |E r(a) - E r(a')| / ||a - a'|| over `pairs` uniform pairs in
// the box. Degenerate pairs are redrawn.
inline LipschitzEstimate lipschitz_estimate(const GameModel& model, const Box& box,
                                            std::size_t pairs, Rng& rng) {
  box.validate();
  if (pairs == 0) throw std::invalid_argument("lipschitz_estimate: pairs must be >= 1");
  if (box.dim() != model.num_nodes())
    throw std::invalid_argument("lipschitz_estimate: box dimension != node count");
  const std::size_t n = box.dim();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&](std::vector<double>& a) {
    for (std::size_t i = 0; i < n; ++i)
      a[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * unit(rng);
  };
  LipschitzEstimate est;
  est.per_node.assign(model.num_nodes(), 0.0);
  std::vector<double> a(n), b(n);
  for (std::size_t s = 0; s < pairs; ++s) {
    draw(a);
    draw(b);
    double dist = l2_distance(a, b);
    int guard = 0;
    while (dist == 0.0 && guard++ < 100) {
      draw(b);
      dist = l2_distance(a, b);
    }
    if (dist == 0.0) continue;  // degenerate box (single point)
    for (std::size_t j = 0; j < model.num_nodes(); ++j) {
      const double q =
          std::abs(model.expected_payoff(a, j) - model.expected_payoff(b, j)) / dist;
      est.per_node[j] = std::max(est.per_node[j], q);
    }
  }
  for (double v : est.per_node) est.overall = std::max(est.overall, v);
  return est;
}

inline bool epsilon_close(std::span<const double> a, std::span<const double> a_star,
                          double eps) {
  return l2_distance(a, a_star) < eps;
}

struct NashCheckResult {
  bool ok = true;
  double worst_gain = 0.0;  // best unilateral improvement found on the grid
  std::size_t worst_node = 0;
};

// Probe-grid epsilon-Nash check: no node may gain more than eps in expected
// payoff by a probed unilateral deviation.
inline NashCheckResult epsilon_nash_check(
    const GameModel& model, std::span<const double> a, double eps,
    const std::vector<std::vector<double>>& deviations_per_node) {
  if (deviations_per_node.size() != model.num_nodes())
    throw std::invalid_argument("nash check: need one deviation list per node");
  NashCheckResult out;
  std::vector<double> probe(a.begin(), a.end());
  for (std::size_t j = 0; j < model.num_nodes(); ++j) {
    const double base = model.expected_payoff(a, j);
    for (double dev : deviations_per_node[j]) {
      probe[j] = dev;
      const double gain = model.expected_payoff(probe, j) - base;
      if (gain > out.worst_gain) {
        out.worst_gain = gain;
        out.worst_node = j;
      }
    }
    probe[j] = a[j];
  }
  out.ok = out.worst_gain <= eps;
  return out;
}

}  // namespace nashseek
