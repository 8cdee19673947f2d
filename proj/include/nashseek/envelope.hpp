#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nashseek/interpolation.hpp"
#include "nashseek/stats.hpp"

namespace nashseek {

struct EnvelopeFit {
  bool accepted = false;
  double decay_rate = 0.0;   // fitted mbar (positive when accepted)
  double amplitude = 0.0;    // fitted Mbar = exp(intercept)/Delta0
  double floor = 0.0;        // mean gap over the final 10% of the window
  double initial_gap = 0.0;  // Delta0 = gap at the window start
  std::size_t fit_points = 0;
  std::string diagnostic;
};

// Log-linear fit of an exponential decay toward a residual floor.
// floor = mean of the final 10% of samples. The fit runs on
// ln(max(gap - floor, floor_min)) over the decaying segment: the maximal
// prefix on which a 5-point moving average strictly decreases, truncated
// where gap - floor falls under 5% of the initial amplitude (points at the
// floor carry no decay information and would wreck the log fit).
inline EnvelopeFit fit_stability_envelope(std::span<const double> times,
                                          std::span<const double> gaps) {
  if (times.size() != gaps.size() || times.size() < 10)
    throw std::invalid_argument("envelope fit: need >= 10 matching samples");
  EnvelopeFit fit;
  fit.initial_gap = gaps.front();

  const std::size_t n = gaps.size();
  const std::size_t tail = std::max<std::size_t>(1, n / 10);
  double floor_acc = 0.0;
  for (std::size_t i = n - tail; i < n; ++i) floor_acc += gaps[i];
  fit.floor = floor_acc / static_cast<double>(tail);

  // 5-point moving average; the decaying prefix ends when it stops falling.
  std::vector<double> ma;
  ma.reserve(n);
  for (std::size_t i = 0; i + 5 <= n; ++i) {
    double s = 0.0;
    for (std::size_t l = 0; l < 5; ++l) s += gaps[i + l];
    ma.push_back(s / 5.0);
  }
  std::size_t prefix = ma.size();
  for (std::size_t i = 1; i < ma.size(); ++i) {
    if (!(ma[i] < ma[i - 1])) {
      prefix = i;
      break;
    }
  }
  // prefix indexes moving-average positions; map back to sample count.
  std::size_t usable = std::min(n, prefix + 4);

  const double floor_min = 1e-12 * std::max(1.0, fit.initial_gap);
  const double cut = std::max(floor_min, 0.05 * (fit.initial_gap - fit.floor));
  std::vector<double> xs, ys;
  xs.reserve(usable);
  ys.reserve(usable);
  for (std::size_t i = 0; i < usable; ++i) {
    const double excess = gaps[i] - fit.floor;
    if (excess < cut) break;
    xs.push_back(times[i] - times.front());
    ys.push_back(std::log(excess));
  }
  fit.fit_points = xs.size();
  if (xs.size() < 5) {
    fit.diagnostic = "no decaying segment (gap not falling past the floor)";
    return fit;
  }
  const auto lf = linear_fit(xs, ys);
  if (!(lf.slope < 0.0)) {
    fit.diagnostic = "fit rejected: slope >= 0 (gap does not decay)";
    return fit;
  }
  fit.accepted = true;
  fit.decay_rate = -lf.slope;
  fit.amplitude =
      fit.initial_gap > 0.0 ? std::exp(lf.intercept) / fit.initial_gap : 0.0;
  return fit;
}

// Gap series ||path(t) - a_star|| sampled on a uniform grid over the window.
inline EnvelopeFit fit_stability_envelope(const InterpolatedPath& path,
                                          std::span<const double> a_star, double t0,
                                          double t1, std::size_t samples = 400) {
  if (!(t1 > t0)) throw std::invalid_argument("envelope fit: empty window");
  if (samples < 10) throw std::invalid_argument("envelope fit: need >= 10 samples");
  std::vector<double> times(samples), gaps(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    const double t =
        t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(samples - 1);
    times[i] = t;
    gaps[i] = l2_distance(path.eval(t), a_star);
  }
  return fit_stability_envelope(times, gaps);
}

// Same fit on the gap of the dither-averaged path: each sample is the mean of
// the path over one full period centered at the sample time. Large dithers
// make the raw gap oscillate with an amplitude far above the residual floor;
// averaging over whole periods removes that component before fitting.
inline EnvelopeFit fit_stability_envelope_period_averaged(
    const InterpolatedPath& path, std::span<const double> a_star, double t0, double t1,
    double period, std::size_t samples = 400, std::size_t sub = 32) {
  if (!(period > 0.0)) throw std::invalid_argument("envelope fit: period must be > 0");
  if (!(t1 - t0 > 2.0 * period))
    throw std::invalid_argument("envelope fit: window shorter than two periods");
  std::vector<double> times(samples), gaps(samples);
  const std::size_t n = path.nodes();
  std::vector<double> mean(n);
  for (std::size_t i = 0; i < samples; ++i) {
    const double c = (t0 + 0.5 * period) +
                     (t1 - t0 - period) * static_cast<double>(i) /
                         static_cast<double>(samples - 1);
    std::fill(mean.begin(), mean.end(), 0.0);
    for (std::size_t s = 0; s < sub; ++s) {
      const double t =
          c - 0.5 * period + period * (static_cast<double>(s) + 0.5) /
                                 static_cast<double>(sub);
      const auto v = path.eval(t);
      for (std::size_t j = 0; j < n; ++j) mean[j] += v[j];
    }
    for (auto& v : mean) v /= static_cast<double>(sub);
    times[i] = c;
    gaps[i] = l2_distance(mean, a_star);
  }
  return fit_stability_envelope(times, gaps);
}

}  // namespace nashseek
