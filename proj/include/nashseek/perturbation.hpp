#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace nashseek {

struct FrequencyViolation {
  enum class Kind { Duplicate, SumCollision };
  Kind kind;
  // Duplicate: frequencies j and jp coincide. SumCollision: freq[j] + freq[jp]
  // collides with freq[jpp].
  std::size_t j = 0, jp = 0, jpp = 0;
  double lhs = 0.0, rhs = 0.0;
};

struct FrequencyReport {
  bool ok = true;
  std::vector<FrequencyViolation> violations;

  std::string to_string() const {
    if (ok) return "frequencies ok";
    std::ostringstream os;
    for (const auto& v : violations) {
      if (v.kind == FrequencyViolation::Kind::Duplicate)
        os << "duplicate frequencies at nodes (" << v.j << ", " << v.jp << "): "
           << v.lhs << "\n";
      else
        os << "sum collision: freq[" << v.j << "] + freq[" << v.jp << "] = " << v.lhs
           << " matches freq[" << v.jpp << "] = " << v.rhs << "\n";
    }
    return os.str();
  }
};

// Dither frequencies must be positive, pairwise distinct, and no sum of two
// (a frequency with itself included) may coincide with any third. Collisions
// are judged at relative tolerance rel_tol against the largest frequency.
inline FrequencyReport validate_frequencies(std::span<const double> freqs,
                                            double rel_tol = 1e-9) {
  FrequencyReport rep;
  const std::size_t n = freqs.size();
  for (double f : freqs) {
    if (!(f > 0.0) || !std::isfinite(f))
      throw std::invalid_argument("frequencies must be finite and > 0");
  }
  double fmax = 0.0;
  for (double f : freqs) fmax = std::max(fmax, f);
  const double tol = rel_tol * fmax;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t jp = j + 1; jp < n; ++jp) {
      if (std::abs(freqs[j] - freqs[jp]) <= tol) {
        rep.violations.push_back({FrequencyViolation::Kind::Duplicate, j, jp, 0,
                                  freqs[j], freqs[jp]});
      }
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t jp = j; jp < n; ++jp) {
      const double sum = freqs[j] + freqs[jp];
      for (std::size_t jpp = 0; jpp < n; ++jpp) {
        if (std::abs(sum - freqs[jpp]) <= tol) {
          rep.violations.push_back(
              {FrequencyViolation::Kind::SumCollision, j, jp, jpp, sum, freqs[jpp]});
        }
      }
    }
  }
  rep.ok = rep.violations.empty();
  return rep;
}

// Per-node sinusoidal dither b_j sin(Omega_j khat + phi_j) plus the update
// gain z_j. A node with growth 0 is frozen and may carry amplitude 0.
struct PerturbationParams {
  std::vector<double> amplitude;  // b_j, action units
  std::vector<double> frequency;  // Omega_j, radians per unit of cumulative time
  std::vector<double> phase;      // phi_j in [0, 2*pi]
  std::vector<double> growth;     // z_j >= 0

  std::size_t nodes() const { return amplitude.size(); }

  double signal(std::size_t j, double khat) const {
    return amplitude[j] * std::sin(frequency[j] * khat + phase[j]);
  }

  void validate(double freq_rel_tol = 1e-9) const {
    const std::size_t n = amplitude.size();
    if (n == 0) throw std::invalid_argument("perturbation: no nodes");
    if (frequency.size() != n || phase.size() != n || growth.size() != n)
      throw std::invalid_argument("perturbation: per-node arrays must have equal length");
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(amplitude[j]) || amplitude[j] < 0.0)
        throw std::invalid_argument("perturbation: amplitude must be finite and >= 0 (node " +
                                    std::to_string(j) + ")");
      if (!(growth[j] >= 0.0))
        throw std::invalid_argument("perturbation: growth must be >= 0 (node " +
                                    std::to_string(j) + ")");
      if (growth[j] > 0.0 && !(amplitude[j] > 0.0))
        throw std::invalid_argument("perturbation: active node needs amplitude > 0 (node " +
                                    std::to_string(j) + ")");
      if (!(phase[j] >= 0.0 && phase[j] <= 2.0 * std::numbers::pi))
        throw std::invalid_argument("perturbation: phase must lie in [0, 2*pi] (node " +
                                    std::to_string(j) + ")");
    }
    const auto rep = validate_frequencies(frequency, freq_rel_tol);
    if (!rep.ok)
      throw std::invalid_argument("perturbation: " + rep.to_string());
  }
};

}  // namespace nashseek
