#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "nashseek/game_model.hpp"
#include "nashseek/perturbation.hpp"
#include "nashseek/rng.hpp"
#include "nashseek/seeker.hpp"

namespace nashseek {

// Limiting-dynamics solution on a fixed grid. At every grid point the action
// equals intermediary + dither evaluated at that time.
struct OdeSolution {
  std::vector<double> t;
  std::vector<std::vector<double>> intermediary;
  std::vector<std::vector<double>> actions;
  double step = 0.0;

  std::size_t nodes() const { return intermediary.empty() ? 0 : intermediary.front().size(); }
};

namespace detail {

inline std::size_t plan_steps(double t0, double t1, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("ode: step must be > 0");
  if (!(t1 >= t0)) throw std::invalid_argument("ode: t1 must be >= t0");
  const double span = t1 - t0;
  auto steps = static_cast<std::size_t>(std::ceil(span / h - 1e-12));
  return steps == 0 && span > 0.0 ? 1 : steps;
}

}  // namespace detail

// drift(t, intermediary, out): writes d intermediary / dt.
using DriftFn =
    std::function<void(double, std::span<const double>, std::span<double>)>;

// Classical fixed-step 4th-order integration of a non-autonomous drift. The
// final step is shortened so the grid ends at t1 exactly.
inline OdeSolution integrate_rk4(const DriftFn& drift, const PerturbationParams& p,
                                 std::span<const double> start, double t0, double t1,
                                 double h) {
  const std::size_t n = start.size();
  const std::size_t steps = detail::plan_steps(t0, t1, h);
  OdeSolution sol;
  sol.step = h;
  sol.t.reserve(steps + 1);
  sol.intermediary.reserve(steps + 1);
  sol.actions.reserve(steps + 1);

  std::vector<double> y(start.begin(), start.end());
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  auto record = [&](double t) {
    sol.t.push_back(t);
    sol.intermediary.push_back(y);
    std::vector<double> a(n);
    for (std::size_t j = 0; j < n; ++j) a[j] = y[j] + p.signal(j, t);
    sol.actions.push_back(std::move(a));
  };

  double t = t0;
  record(t);
  for (std::size_t s = 0; s < steps; ++s) {
    const double t_next = (s + 1 == steps) ? t1 : t0 + h * static_cast<double>(s + 1);
    const double dt = t_next - t;
    drift(t, y, k1);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = y[j] + 0.5 * dt * k1[j];
    drift(t + 0.5 * dt, tmp, k2);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = y[j] + 0.5 * dt * k2[j];
    drift(t + 0.5 * dt, tmp, k3);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = y[j] + dt * k3[j];
    drift(t_next, tmp, k4);
    for (std::size_t j = 0; j < n; ++j) {
      y[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
      if (!std::isfinite(y[j])) throw NumericalAbort("non-finite ode state", j, s);
    }
    t = t_next;
    record(t);
  }
  return sol;
}

// Drift of the averaged limit: z_j b_j sin(Omega_j t + phi_j) E[r_j(S, a_t)]
// with a_t rebuilt from the dither inside every stage evaluation.
inline DriftFn expected_drift(const GameModel& model, const PerturbationParams& p) {
  return [&model, &p](double t, std::span<const double> y, std::span<double> out) {
    const std::size_t n = y.size();
    std::vector<double> a(n);
    for (std::size_t j = 0; j < n; ++j) a[j] = y[j] + p.signal(j, t);
    for (std::size_t j = 0; j < n; ++j) {
      const double e = model.expected_payoff(a, j);
      if (!std::isfinite(e)) throw NumericalAbort("non-finite expected payoff", j, 0);
      out[j] = p.growth[j] * p.signal(j, t) * e;
    }
  };
}

inline OdeSolution integrate_deterministic(const GameModel& model,
                                           const PerturbationParams& p,
                                           std::span<const double> start, double t0,
                                           double t1, double h) {
  p.validate();
  return integrate_rk4(expected_drift(model, p), p, start, t0, t1, h);
}

// Euler integration of the realized-payoff dynamics: one fresh state draw per
// step, shared across nodes. Deterministic for a given seed. A first-order
// scheme; the drift is resampled noise, so higher order buys nothing.
inline OdeSolution integrate_stochastic(const GameModel& model,
                                        const PerturbationParams& p,
                                        std::span<const double> start, double t0,
                                        double t1, double h, std::uint64_t seed) {
  p.validate();
  const std::size_t n = start.size();
  const std::size_t steps = detail::plan_steps(t0, t1, h);
  OdeSolution sol;
  sol.step = h;
  Rng rng = make_rng(seed, 0x534f4445u);

  std::vector<double> y(start.begin(), start.end());
  auto record = [&](double t) {
    sol.t.push_back(t);
    sol.intermediary.push_back(y);
    std::vector<double> a(n);
    for (std::size_t j = 0; j < n; ++j) a[j] = y[j] + p.signal(j, t);
    sol.actions.push_back(std::move(a));
  };

  double t = t0;
  record(t);
  std::vector<double> a(n);
  for (std::size_t s = 0; s < steps; ++s) {
    const double t_next = (s + 1 == steps) ? t1 : t0 + h * static_cast<double>(s + 1);
    const double dt = t_next - t;
    for (std::size_t j = 0; j < n; ++j) a[j] = y[j] + p.signal(j, t);
    const State state = model.sample_state(rng);
    for (std::size_t j = 0; j < n; ++j) {
      const double r = model.payoff(state, a, j);
      if (!std::isfinite(r)) throw NumericalAbort("non-finite payoff", j, s);
      y[j] += dt * p.growth[j] * p.signal(j, t) * r;
      if (!std::isfinite(y[j])) throw NumericalAbort("non-finite ode state", j, s);
    }
    t = t_next;
    record(t);
  }
  return sol;
}

struct ErgodicCheck {
  double sampled = 0.0;   // (1/T) integral of weight * realized payoff
  double expected = 0.0;  // (1/T) integral of weight * expected payoff
  double gap = 0.0;
};

// Trapezoid time-averages of weight(t) * payoff along the action path of
// `sol`, with the payoff either resampled per grid point or taken in
// expectation. Default weight is the node's own dither.
inline ErgodicCheck ergodic_average_check(
    const GameModel& model, const PerturbationParams& p, const OdeSolution& sol,
    std::size_t node, double t_end, std::uint64_t seed,
    const std::function<double(double)>& weight = {}) {
  if (sol.t.size() < 2) throw std::invalid_argument("ergodic check: need >= 2 grid points");
  if (!(t_end > sol.t.front()) || t_end > sol.t.back() + 1e-12)
    throw std::invalid_argument("ergodic check: t_end outside solution domain");
  auto w = [&](double t) {
    return weight ? weight(t) : std::sin(p.frequency[node] * t + p.phase[node]);
  };
  Rng rng = make_rng(seed, 0x45524743u);
  double acc_sampled = 0.0, acc_expected = 0.0;
  double prev_s = 0.0, prev_e = 0.0, prev_t = 0.0;
  bool have_prev = false;
  for (std::size_t i = 0; i < sol.t.size() && sol.t[i] <= t_end + 1e-12; ++i) {
    const double t = sol.t[i];
    const auto& a = sol.actions[i];
    const State state = model.sample_state(rng);
    const double ws = w(t);
    const double fs = ws * model.payoff(state, a, node);
    const double fe = ws * model.expected_payoff(a, node);
    if (have_prev) {
      const double dt = t - prev_t;
      acc_sampled += 0.5 * dt * (prev_s + fs);
      acc_expected += 0.5 * dt * (prev_e + fe);
    }
    prev_s = fs;
    prev_e = fe;
    prev_t = t;
    have_prev = true;
  }
  const double span = prev_t - sol.t.front();
  ErgodicCheck out;
  if (span > 0.0) {
    out.sampled = acc_sampled / span;
    out.expected = acc_expected / span;
  }
  out.gap = std::abs(out.sampled - out.expected);
  return out;
}

}  // namespace nashseek
