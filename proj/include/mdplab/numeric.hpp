#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

namespace mdplab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Thrown when a quantity has no closed form for the requested family and
/// the caller must go through a Monte Carlo estimate instead.
class UnavailableError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Standard normal density, upper tail Q(x) = P(Z > x) and CDF.
double normal_pdf(double x);
double normal_q(double x);
double normal_cdf(double x);

/// log Q(x), accurate far into the tail (continued fraction beyond x = 30).
double log_normal_q(double x);

/// log(exp(a) + exp(b)) without overflow; -inf inputs allowed.
double log_add_exp(double a, double b);

/// log(exp(a) - exp(b)) for a >= b; returns -inf when a == b.
double log_sub_exp(double a, double b);

/// log(1 - exp(x)) for x <= 0.
double log1m_exp(double x);

double log_sum_exp(std::span<const double> xs);

/// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x);
  [[nodiscard]] double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares y = intercept + slope * x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

/// floor() that absorbs round-off just below an integer (e.g. 999.9999999999 -> 1000).
long long robust_floor(double x);

}  // namespace mdplab
