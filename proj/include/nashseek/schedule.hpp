#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include "nashseek/special_functions.hpp"

namespace nashseek {

enum class ScheduleKind { Vanishing, Constant };

// Learning-rate rule. Constant: lambda_k = lambda0 for all k. Vanishing uses
// the canonical rule lambda_k = lambda0/(k+1).
//
// The cumulative clock is khat(k) = sum_{k'=1..k} lambda_{k'}; khat(0) = 0,
// so iteration 0 dithers with the bare phase. Iteration k itself scales its
// update by lambda(k).
struct StepSchedule {
  ScheduleKind kind = ScheduleKind::Constant;
  double lambda0 = 0.01;

  void validate() const {
    if (!(lambda0 > 0.0)) throw std::invalid_argument("schedule: lambda0 must be > 0");
  }

  double lambda(std::size_t k) const {
    return kind == ScheduleKind::Constant
               ? lambda0
               : lambda0 / static_cast<double>(k + 1);
  }

  double khat(std::size_t k) const {
    double acc = 0.0;
    for (std::size_t kp = 1; kp <= k; ++kp) acc += lambda(kp);
    return acc;
  }

  // Admissibility of the vanishing-rate conditions (positive rates, divergent
  // sum, summable squares). Holds symbolically for the canonical rule only.
  bool vanishing_conditions_hold() const {
    return kind == ScheduleKind::Vanishing && lambda0 > 0.0;
  }
  bool is_constant() const { return kind == ScheduleKind::Constant; }

  // sum_{k>=0} lambda(t+k)^2. Exact for the vanishing rule via trigamma;
  // the constant rule diverges and requires a finite truncation length.
  double tail_sq_sum(std::size_t t, std::size_t truncation = 0) const {
    if (kind == ScheduleKind::Vanishing)
      return lambda0 * lambda0 * trigamma(static_cast<double>(t) + 1.0);
    if (truncation == 0)
      throw std::invalid_argument(
          "schedule: constant-rate tail sum diverges; pass a finite truncation");
    return lambda0 * lambda0 * static_cast<double>(truncation);
  }
};

inline std::string to_string(ScheduleKind k) {
  return k == ScheduleKind::Constant ? "constant" : "vanishing";
}

}  // namespace nashseek
