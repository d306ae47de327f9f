#include "mdplab/numeric.hpp"
#include "mdplab/json_util.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

namespace mdplab {

namespace {
constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // 0.5*log(2*pi)
}

double normal_pdf(double x) { return std::exp(-0.5 * x * x - kLogSqrt2Pi); }

double normal_q(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double log_normal_q(double x) {
  if (x == kInf) return -kInf;
  if (x == -kInf) return 0.0;
  if (x < -5.0) return std::log1p(-normal_q(-x));
  if (x <= 30.0) return std::log(normal_q(x));
  // Q(x) = phi(x) / (x + 1/(x + 2/(x + 3/(x + ...)))), evaluated bottom-up.
  double cf = x;
  for (int k = 60; k >= 1; --k) cf = x + k / cf;
  return -0.5 * x * x - kLogSqrt2Pi - std::log(cf);
}

double log_add_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

double log_sub_exp(double a, double b) {
  if (b > a) throw std::domain_error("log_sub_exp: b > a");
  if (b == -kInf) return a;
  if (a == b) return -kInf;
  return a + log1m_exp(b - a);
}

double log1m_exp(double x) {
  if (x > 0.0) throw std::domain_error("log1m_exp: x > 0");
  if (x == 0.0) return -kInf;
  // Maechler's split between the two stable forms.
  return x > -std::numbers::ln2 ? std::log(-std::expm1(x)) : std::log1p(-std::exp(x));
}

double log_sum_exp(std::span<const double> xs) {
  double m = -kInf;
  for (double x : xs) m = std::max(m, x);
  if (m == -kInf || m == kInf) return m;
  CompensatedSum s;
  for (double x : xs) s.add(std::exp(x - m));
  return m + std::log(s.value());
}

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x))
    comp_ += (sum_ - t) + x;
  else
    comp_ += (x - t) + sum_;
  sum_ = t;
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_line: need at least two paired points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit fit;
  if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

long long robust_floor(double x) {
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) return static_cast<long long>(r);
  return static_cast<long long>(std::floor(x));
}

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

}  // namespace mdplab
