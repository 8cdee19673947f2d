#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace nashseek {

// e^x E1(x) for x > 0, where E1 is the exponential integral.
// Small x via std::expint (E1(x) = -Ei(-x)); large x via the continued
// fraction e^x E1(x) = 1/(x+1- 1/(x+3- 4/(x+5- 9/(...)))), which avoids the
// overflow/underflow of forming the product directly.
inline double e1_scaled(double x) {
  if (!(x > 0.0)) throw std::domain_error("e1_scaled: requires x > 0");
  if (x < 1.5) return std::exp(x) * (-std::expint(-x));
  double cf = 0.0;
  for (int n = 60; n >= 1; --n) {
    const double nn = static_cast<double>(n);
    cf = nn * nn / (x + (2.0 * nn + 1.0) - cf);
  }
  return 1.0 / (x + 1.0 - cf);
}

// trigamma(x) = sum_{k>=0} 1/(x+k)^2; recurrence up to the asymptotic range.
inline double trigamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("trigamma: requires x > 0");
  double acc = 0.0;
  while (x < 20.0) {
    acc += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x, inv2 = inv * inv;
  // 1/x + 1/(2x^2) + 1/(6x^3) - 1/(30x^5) + 1/(42x^7) - 1/(30x^9)
  double s = inv + 0.5 * inv2 + inv * inv2 * (1.0 / 6.0);
  s -= inv * inv2 * inv2 * (1.0 / 30.0);
  s += inv * inv2 * inv2 * inv2 * (1.0 / 42.0);
  s -= inv * inv2 * inv2 * inv2 * inv2 * (1.0 / 30.0);
  return acc + s;
}

// E[ln(base + sum_i scale_i X_i)] with X_i i.i.d. unit exponentials.
// Partial-fraction expansion of the hypoexponential density gives
//   E = ln(base) + sum_i w_i e1_scaled(base/scale_i),
//   w_i = prod_{l != i} scale_i/(scale_i - scale_l).
// Zero scales drop out. Near-equal scales make the weights ill-conditioned,
// so they are spread apart by 1 part in 1e7; the worst-case error for such
// confluent pairs is ~1e-7 (cancellation and perturbation balanced).
inline double expected_log_shifted(double base, std::span<const double> scales) {
  if (!(base > 0.0)) throw std::domain_error("expected_log_shifted: requires base > 0");
  std::vector<double> c;
  c.reserve(scales.size());
  for (double s : scales) {
    if (s < 0.0) throw std::domain_error("expected_log_shifted: negative scale");
    if (s > 0.0) c.push_back(s);
  }
  if (c.empty()) return std::log(base);
  std::sort(c.begin(), c.end());
  for (std::size_t i = 1; i < c.size(); ++i) {
    if (c[i] - c[i - 1] <= 1e-7 * c[i]) c[i] = c[i - 1] * (1.0 + 1e-7);
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    double w = 1.0;
    for (std::size_t l = 0; l < c.size(); ++l) {
      if (l != i) w *= c[i] / (c[i] - c[l]);
    }
    acc += w * e1_scaled(base / c[i]);
  }
  return std::log(base) + acc;
}

}  // namespace nashseek
