#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mdplab/rng.hpp"

namespace mdplab {

/// Stationary finite-state Markov chain X_i = v(state_i).
///
/// Construction validates that the transition matrix is row-stochastic
/// (1e-12), solves for the stationary law pi (pi P = pi to 1e-10) and
/// requires the values to be centered under pi (1e-10).
class FiniteMarkovChain {
 public:
  FiniteMarkovChain(std::vector<double> values, std::vector<std::vector<double>> transition);

  /// Same transition matrix, values shifted to have mean zero under pi.
  static FiniteMarkovChain centered(std::vector<double> values,
                                    std::vector<std::vector<double>> transition);

  /// Symmetric two-state chain on {+value, -value} staying put with probability `stay`.
  static FiniteMarkovChain two_state(double stay, double value = 1.0);

  /// Moving-window sum of `window` i.i.d. Rademacher innovations; the state is
  /// the last `window` signs (2^window states). m-dependent with m = window - 1.
  static FiniteMarkovChain moving_window(int window);

  [[nodiscard]] std::size_t size() const { return values_.size(); }
  [[nodiscard]] std::span<const double> values() const { return values_; }
  [[nodiscard]] const std::vector<std::vector<double>>& transition() const { return transition_; }
  [[nodiscard]] std::span<const double> stationary() const { return pi_; }
  [[nodiscard]] double sup_norm() const;
  [[nodiscard]] double variance() const;

  /// k-step transition matrix P^k (k >= 0).
  [[nodiscard]] std::vector<std::vector<double>> power(int k) const;

  /// Cov(X_0, X_k) under stationarity.
  [[nodiscard]] double covariance(int k) const;

  [[nodiscard]] std::size_t draw_stationary(Stream& rng) const;
  [[nodiscard]] std::size_t step(std::size_t state, double u) const;

 private:
  std::vector<double> values_;
  std::vector<std::vector<double>> transition_;
  std::vector<std::vector<double>> cumulative_;
  std::vector<double> pi_;
  std::vector<double> pi_cumulative_;
};

}  // namespace mdplab
