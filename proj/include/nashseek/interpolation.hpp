#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "nashseek/ode.hpp"
#include "nashseek/seeker.hpp"
#include "nashseek/stats.hpp"

namespace nashseek {

// Affine interpolation of the discrete intermediary iterates on the
// cumulative clock. Evaluation at a breakpoint returns the stored iterate
// exactly; evaluation outside the covered range is an error.
struct InterpolatedPath {
  std::vector<double> times;                 // strictly increasing clock values
  std::vector<std::vector<double>> values;   // per-time intermediary vectors

  double t_begin() const { return times.front(); }
  double t_end() const { return times.back(); }
  std::size_t nodes() const { return values.empty() ? 0 : values.front().size(); }

  std::vector<double> eval(double t) const {
    if (times.empty()) throw std::out_of_range("interpolated path: empty");
    if (t < times.front() || t > times.back())
      throw std::out_of_range("interpolated path: evaluation outside domain");
    const auto it = std::lower_bound(times.begin(), times.end(), t);
    const auto hi = static_cast<std::size_t>(it - times.begin());
    if (hi < times.size() && times[hi] == t) return values[hi];
    const std::size_t lo = hi - 1;
    const double w = (t - times[lo]) / (times[hi] - times[lo]);
    std::vector<double> out(values[lo].size());
    for (std::size_t j = 0; j < out.size(); ++j)
      out[j] = values[lo][j] + w * (values[hi][j] - values[lo][j]);
    return out;
  }
};

inline InterpolatedPath interpolate(const Trajectory& traj) {
  if (traj.records.empty()) throw std::invalid_argument("interpolate: empty trajectory");
  InterpolatedPath path;
  path.times.reserve(traj.records.size());
  path.values.reserve(traj.records.size());
  for (const auto& rec : traj.records) {
    if (!path.times.empty() && !(rec.clock > path.times.back()))
      throw std::invalid_argument("interpolate: clock not strictly increasing");
    path.times.push_back(rec.clock);
    path.values.push_back(rec.intermediary);
  }
  return path;
}

// Supremum of the Euclidean gap between the interpolated iterates and an ODE
// solution over [t0, t0 + window], evaluated on the ODE grid (pitch = the
// integrator step) plus the window edges. The caller integrates the ODE from
// the path's value at t0; this routine only measures.
inline double sup_gap(const InterpolatedPath& path, const OdeSolution& ode, double t0,
                      double window) {
  if (!(window >= 0.0)) throw std::invalid_argument("sup_gap: negative window");
  const double t1 = t0 + window;
  const double slack = 1e-9 * std::max(1.0, std::abs(t1));
  if (t0 < path.t_begin() - slack || t1 > path.t_end() + slack)
    throw std::invalid_argument("sup_gap: window outside the interpolated path");
  if (ode.t.empty() || t0 < ode.t.front() - slack || t1 > ode.t.back() + slack)
    throw std::invalid_argument("sup_gap: window outside the ode solution");

  auto clip = [&](double t) { return std::clamp(t, path.t_begin(), path.t_end()); };
  double worst = 0.0;
  auto consider = [&](double t, std::span<const double> ode_val) {
    const auto pv = path.eval(clip(t));
    worst = std::max(worst, l2_distance(pv, ode_val));
  };
  for (std::size_t i = 0; i < ode.t.size(); ++i) {
    const double t = ode.t[i];
    if (t < t0 - slack || t > t1 + slack) continue;
    consider(t, ode.intermediary[i]);
  }
  return worst;
}

}  // namespace nashseek
