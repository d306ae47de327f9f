#include "mdplab/markov_chain.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mdplab {

namespace {

std::vector<double> solve_stationary(const std::vector<std::vector<double>>& p) {
  const auto s = static_cast<Eigen::Index>(p.size());
  // Stack (P^T - I) pi = 0 with the normalization row and solve in least squares.
  Eigen::MatrixXd a(s + 1, s);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(s + 1);
  for (Eigen::Index i = 0; i < s; ++i)
    for (Eigen::Index j = 0; j < s; ++j) a(i, j) = p[j][i] - (i == j ? 1.0 : 0.0);
  a.row(s).setOnes();
  b(s) = 1.0;
  Eigen::VectorXd pi = a.colPivHouseholderQr().solve(b);
  return {pi.data(), pi.data() + s};
}

}  // namespace

FiniteMarkovChain::FiniteMarkovChain(std::vector<double> values,
                                     std::vector<std::vector<double>> transition)
    : values_(std::move(values)), transition_(std::move(transition)) {
  const std::size_t s = values_.size();
  if (s == 0) throw std::invalid_argument("chain: empty state space");
  if (transition_.size() != s) throw std::invalid_argument("chain: transition must be S x S");
  for (const auto& row : transition_) {
    if (row.size() != s) throw std::invalid_argument("chain: transition must be S x S");
    double total = 0.0;
    for (double x : row) {
      if (!(x >= 0.0)) throw std::invalid_argument("chain: negative transition probability");
      total += x;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw std::invalid_argument("chain: transition rows must sum to 1");
  }
  pi_ = solve_stationary(transition_);
  for (std::size_t y = 0; y < s; ++y) {
    double lhs = 0.0;
    for (std::size_t x = 0; x < s; ++x) lhs += pi_[x] * transition_[x][y];
    if (std::abs(lhs - pi_[y]) > 1e-10 || pi_[y] < -1e-12)
      throw std::invalid_argument("chain: no unique stationary distribution");
  }
  for (double& x : pi_) x = std::max(x, 0.0);
  double mean = 0.0;
  for (std::size_t x = 0; x < s; ++x) mean += pi_[x] * values_[x];
  if (std::abs(mean) > 1e-10)
    throw std::invalid_argument("chain: values must be centered under the stationary law (mean " +
                                std::to_string(mean) + ")");

  cumulative_.resize(s);
  for (std::size_t x = 0; x < s; ++x) {
    cumulative_[x].resize(s);
    double c = 0.0;
    for (std::size_t y = 0; y < s; ++y) cumulative_[x][y] = (c += transition_[x][y]);
  }
  pi_cumulative_.resize(s);
  double c = 0.0;
  for (std::size_t y = 0; y < s; ++y) pi_cumulative_[y] = (c += pi_[y]);
}

FiniteMarkovChain FiniteMarkovChain::centered(std::vector<double> values,
                                              std::vector<std::vector<double>> transition) {
  const auto pi = solve_stationary(transition);
  double mean = 0.0;
  for (std::size_t x = 0; x < values.size() && x < pi.size(); ++x) mean += pi[x] * values[x];
  for (double& v : values) v -= mean;
  return {std::move(values), std::move(transition)};
}

FiniteMarkovChain FiniteMarkovChain::two_state(double stay, double value) {
  if (!(stay >= 0.0 && stay <= 1.0)) throw std::invalid_argument("two_state: stay must be in [0,1]");
  return {{value, -value}, {{stay, 1.0 - stay}, {1.0 - stay, stay}}};
}

FiniteMarkovChain FiniteMarkovChain::moving_window(int window) {
  if (window < 1 || window > 10) throw std::invalid_argument("moving_window: window in [1,10]");
  const std::size_t s = std::size_t{1} << window;
  const std::size_t mask = s - 1;
  std::vector<double> values(s);
  std::vector<std::vector<double>> p(s, std::vector<double>(s, 0.0));
  for (std::size_t x = 0; x < s; ++x) {
    const int ones = std::popcount(x);
    values[x] = static_cast<double>(2 * ones - window);
    p[x][((x << 1) & mask) | 0] = 0.5;
    p[x][((x << 1) & mask) | 1] = 0.5;
  }
  return {std::move(values), std::move(p)};
}

double FiniteMarkovChain::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double FiniteMarkovChain::variance() const { return covariance(0); }

std::vector<std::vector<double>> FiniteMarkovChain::power(int k) const {
  if (k < 0) throw std::invalid_argument("chain: negative power");
  const auto s = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd p(s, s);
  for (Eigen::Index i = 0; i < s; ++i)
    for (Eigen::Index j = 0; j < s; ++j) p(i, j) = transition_[i][j];
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(s, s);
  Eigen::MatrixXd base = p;
  for (int e = k; e > 0; e >>= 1) {
    if (e & 1) r = r * base;
    base = base * base;
  }
  std::vector<std::vector<double>> out(size(), std::vector<double>(size()));
  for (Eigen::Index i = 0; i < s; ++i)
    for (Eigen::Index j = 0; j < s; ++j) out[i][j] = r(i, j);
  return out;
}

double FiniteMarkovChain::covariance(int k) const {
  const auto pk = power(k);
  double c = 0.0;
  for (std::size_t x = 0; x < size(); ++x) {
    double cond = 0.0;
    for (std::size_t y = 0; y < size(); ++y) cond += pk[x][y] * values_[y];
    c += pi_[x] * values_[x] * cond;
  }
  return c;
}

std::size_t FiniteMarkovChain::draw_stationary(Stream& rng) const {
  const double u = uniform01(rng);
  const auto it = std::upper_bound(pi_cumulative_.begin(), pi_cumulative_.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - pi_cumulative_.begin()), size() - 1);
}

std::size_t FiniteMarkovChain::step(std::size_t state, double u) const {
  const auto& cum = cumulative_[state];
  const auto it = std::upper_bound(cum.begin(), cum.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cum.begin()), size() - 1);
}

}  // namespace mdplab
