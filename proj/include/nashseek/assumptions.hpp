#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "nashseek/bounds.hpp"
#include "nashseek/game_model.hpp"
#include "nashseek/rng.hpp"
#include "nashseek/schedule.hpp"
#include "nashseek/stats.hpp"

namespace nashseek {

// Static checks of the standing assumptions at a candidate equilibrium:
// schedule admissibility, first-order stationarity and own-curvature
// negativity of the expected payoff (finite differences), and diagonal
// dominance of the game Hessian rows H[j][i] = d^2 E r_j / (da_j da_i).
struct AssumptionReport {
  bool vanishing_rate_ok = false;   // canonical vanishing-rate conditions
  bool constant_rate = false;

  std::vector<double> gradient;          // d E r_j / d a_j at the candidate
  std::vector<double> gradient_tol;      // per-node stationarity tolerance
  std::vector<double> own_curvature;     // d^2 E r_j / d a_j^2
  std::vector<std::vector<double>> hessian_row;  // per node j: d^2 E r_j / da_j da_i
  std::vector<double> dominance_margin;  // |H_jj| - sum_{i!=j} |H_ji|

  std::vector<bool> stationary_ok;       // |gradient| <= tolerance
  std::vector<bool> curvature_ok;        // own curvature < 0
  bool local_maximizer_ok = true;        // all nodes stationary and concave
  bool dominance_ok = true;              // all margins > 0
};

namespace detail {

inline double fd_step(double x) { return 1e-3 * std::max(1.0, std::abs(x)); }

// Standard error of the expectation at `a` estimated over `probes` reseeded
// evaluations; 0 for models with an exact expectation.
inline double expectation_probe_stderr(const GameModel& model,
                                       std::span<const double> a, std::size_t node,
                                       std::size_t probes, std::uint64_t seed) {
  const double direct = model.expectation_stderr(a, node);
  if (direct > 0.0) return direct;
  if (!model.is_stochastic() || probes < 2) return 0.0;
  RunningStats st;
  for (std::size_t i = 0; i < probes; ++i)
    st.push(model.expected_payoff_seeded(a, node, mix_seed(seed, i)));
  // Spread across reseeded evaluations collapses to 0 for analytic forms.
  return st.stddev();
}

}  // namespace detail

inline AssumptionReport validate_assumptions(const GameModel& model,
                                             const StepSchedule& schedule,
                                             std::span<const double> candidate,
                                             const Box& domain,
                                             std::size_t probe_budget = 16,
                                             std::uint64_t seed = 0x41535355u) {
  domain.validate();
  const std::size_t n = model.num_nodes();
  if (candidate.size() != n || domain.dim() != n)
    throw std::invalid_argument("validate_assumptions: dimension mismatch");

  AssumptionReport rep;
  rep.vanishing_rate_ok = schedule.vanishing_conditions_hold();
  rep.constant_rate = schedule.is_constant();

  rep.gradient.resize(n);
  rep.gradient_tol.resize(n);
  rep.own_curvature.resize(n);
  rep.hessian_row.assign(n, std::vector<double>(n, 0.0));
  rep.dominance_margin.resize(n);
  rep.stationary_ok.resize(n);
  rep.curvature_ok.resize(n);

  std::vector<double> a(candidate.begin(), candidate.end());
  auto eval = [&](std::size_t node) { return model.expected_payoff(a, node); };

  for (std::size_t j = 0; j < n; ++j) {
    // Shrink the step so probes stay inside the domain box.
    double h = detail::fd_step(candidate[j]);
    h = std::min({h, candidate[j] - domain.lo[j], domain.hi[j] - candidate[j]});
    if (!(h > 0.0))
      throw std::invalid_argument("validate_assumptions: candidate on the domain edge");

    const double base = eval(j);
    a[j] = candidate[j] + h;
    const double up = eval(j);
    a[j] = candidate[j] - h;
    const double dn = eval(j);
    a[j] = candidate[j];
    if (!std::isfinite(up) || !std::isfinite(dn) || !std::isfinite(base))
      throw std::runtime_error("validate_assumptions: non-finite expectation probe");

    rep.gradient[j] = (up - dn) / (2.0 * h);
    rep.own_curvature[j] = (up - 2.0 * base + dn) / (h * h);
    rep.hessian_row[j][j] = rep.own_curvature[j];

    const double se =
        detail::expectation_probe_stderr(model, candidate, j, probe_budget, seed + j);
    const double se_grad = se > 0.0 ? std::sqrt(2.0) * se / (2.0 * h) : 0.0;
    rep.gradient_tol[j] = model.is_stochastic() && se_grad > 0.0 ? 3.0 * se_grad : 1e-6;

    for (std::size_t i = 0; i < n; ++i) {
      if (i == j) continue;
      double hi = detail::fd_step(candidate[i]);
      hi = std::min({hi, candidate[i] - domain.lo[i], domain.hi[i] - candidate[i]});
      if (!(hi > 0.0))
        throw std::invalid_argument("validate_assumptions: candidate on the domain edge");
      a[j] = candidate[j] + h;
      a[i] = candidate[i] + hi;
      const double pp = eval(j);
      a[i] = candidate[i] - hi;
      const double pm = eval(j);
      a[j] = candidate[j] - h;
      const double mm = eval(j);
      a[i] = candidate[i] + hi;
      const double mp = eval(j);
      a[j] = candidate[j];
      a[i] = candidate[i];
      rep.hessian_row[j][i] = (pp - pm - mp + mm) / (4.0 * h * hi);
      if (!std::isfinite(rep.hessian_row[j][i]))
        throw std::runtime_error("validate_assumptions: non-finite curvature probe");
    }

    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (i != j) off += std::abs(rep.hessian_row[j][i]);
    rep.dominance_margin[j] = std::abs(rep.hessian_row[j][j]) - off;

    rep.stationary_ok[j] = std::abs(rep.gradient[j]) <= rep.gradient_tol[j];
    rep.curvature_ok[j] = rep.own_curvature[j] < 0.0;
    if (!rep.stationary_ok[j] || !rep.curvature_ok[j]) rep.local_maximizer_ok = false;
    if (!(rep.dominance_margin[j] > 0.0)) rep.dominance_ok = false;
  }
  return rep;
}

}  // namespace nashseek
