#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "nashseek/game_model.hpp"

namespace nashseek {

// Decoupled concave quadratics r_j(S, a) = -curvature_j (a_j - peak_j)^2
// + noise_sd * S_j with S_j i.i.d. standard normal. noise_sd = 0 gives a
// deterministic model. Expectation and gradient are analytic.
class QuadraticGame final : public GameModel {
 public:
  QuadraticGame(std::vector<double> peak, std::vector<double> curvature,
                double noise_sd = 0.0)
      : peak_(std::move(peak)), curvature_(std::move(curvature)), noise_sd_(noise_sd) {
    if (peak_.size() != curvature_.size() || peak_.empty())
      throw std::invalid_argument("QuadraticGame: peak/curvature size mismatch");
    if (noise_sd_ < 0.0) throw std::invalid_argument("QuadraticGame: noise_sd < 0");
  }

  std::size_t num_nodes() const override { return peak_.size(); }

  State sample_state(Rng& rng) const override {
    State s(peak_.size(), 0.0);
    if (noise_sd_ > 0.0) {
      std::normal_distribution<double> normal(0.0, 1.0);
      for (auto& v : s) v = normal(rng);
    }
    return s;
  }

  double payoff(const State& s, std::span<const double> a, std::size_t j) const override {
    const double d = a[j] - peak_[j];
    return -curvature_[j] * d * d + noise_sd_ * s[j];
  }

  double expected_payoff(std::span<const double> a, std::size_t j) const override {
    const double d = a[j] - peak_[j];
    return -curvature_[j] * d * d;
  }

  double expected_gradient(std::span<const double> a, std::size_t j,
                           std::size_t wrt) const override {
    return wrt == j ? -2.0 * curvature_[j] * (a[j] - peak_[j]) : 0.0;
  }

  bool is_stochastic() const override { return noise_sd_ > 0.0; }

 private:
  std::vector<double> peak_, curvature_;
  double noise_sd_;
};

// State-free payoff vector r_j = value_j; the simplest deterministic model.
class ConstantGame final : public GameModel {
 public:
  explicit ConstantGame(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw std::invalid_argument("ConstantGame: no nodes");
  }

  std::size_t num_nodes() const override { return values_.size(); }
  State sample_state(Rng&) const override { return {}; }
  double payoff(const State&, std::span<const double>, std::size_t j) const override {
    return values_[j];
  }
  double expected_payoff(std::span<const double>, std::size_t j) const override {
    return values_[j];
  }
  double expected_gradient(std::span<const double>, std::size_t, std::size_t) const override {
    return 0.0;
  }
  bool is_stochastic() const override { return false; }

 private:
  std::vector<double> values_;
};

}  // namespace nashseek
