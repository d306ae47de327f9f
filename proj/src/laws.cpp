#include "mdplab/laws.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace mdplab {

namespace {

std::uint64_t band_tag(const Band& b, std::uint64_t kind, double extra = 0.0) {
  return derive_key(kind, {std::bit_cast<std::uint64_t>(b.lo), std::bit_cast<std::uint64_t>(b.hi),
                           static_cast<std::uint64_t>(b.lo_closed) * 2 + b.hi_closed,
                           std::bit_cast<std::uint64_t>(extra)});
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

Estimate log_of(const Estimate& p) {
  if (p.value <= 0.0) return {-kInf, kInf, p.exact};
  return {std::log(p.value), p.exact ? 0.0 : p.se / p.value, p.exact};
}

}  // namespace

bool Band::contains(double m) const {
  const bool above_lo = lo_closed ? m >= lo : m > lo;
  const bool below_hi = hi_closed ? m <= hi : m < hi;
  return above_lo && below_hi;
}

bool Band::empty() const { return lo > hi || (lo == hi && !(lo_closed && hi_closed)); }

// ---------------------------------------------------------------------------
// Monte Carlo defaults

Estimate EntryLaw::prob(const Band& band) const {
  return mc_mean([&](double x) { return band.contains(std::abs(x)) ? 1.0 : 0.0; },
                 band_tag(band, 1));
}

Estimate EntryLaw::log_prob(const Band& band) const { return log_of(prob(band)); }

Estimate EntryLaw::moment(const Band& band, int power) const {
  if (power != 1 && power != 2) throw std::invalid_argument("moment: power must be 1 or 2");
  return mc_mean(
      [&](double x) { return band.contains(std::abs(x)) ? (power == 1 ? x : x * x) : 0.0; },
      band_tag(band, 2, power));
}

Estimate EntryLaw::abs_moment(const Band& band, double power) const {
  return mc_mean(
      [&](double x) { return band.contains(std::abs(x)) ? std::pow(std::abs(x), power) : 0.0; },
      band_tag(band, 3, power));
}

Estimate EntryLaw::log_exp_moment(double lambda, const Band& band) const {
  const double bound = sup_abs();
  if (!std::isfinite(bound))
    throw UnavailableError(describe() +
                           ": exponential moment of an unbounded law needs a closed form");
  // Factor out exp(lambda * bound) so the MC average stays in [0, 1].
  const Estimate m = mc_mean(
      [&](double x) {
        const double a = std::abs(x);
        return band.contains(a) ? std::exp(lambda * (a - bound)) : 0.0;
      },
      band_tag(band, 4, lambda));
  Estimate out = log_of(m);
  if (out.value != -kInf) out.value += lambda * bound;
  return out;
}

double EntryLaw::log_mgf(double) const {
  throw UnavailableError(describe() + ": no closed-form cumulant generating function");
}
double EntryLaw::dlog_mgf(double) const {
  throw UnavailableError(describe() + ": no closed-form cumulant generating function");
}
double EntryLaw::d2log_mgf(double) const {
  throw UnavailableError(describe() + ": no closed-form cumulant generating function");
}
double EntryLaw::sample_tilted(double, Stream&) const {
  throw UnavailableError(describe() + ": tilted sampling not available");
}

// ---------------------------------------------------------------------------
// Gaussian

GaussianLaw::GaussianLaw(double sigma) : sigma_(sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw std::invalid_argument("gaussian: sigma must be positive");
}

std::string GaussianLaw::describe() const { return "gaussian(" + fmt(sigma_) + ")"; }

double GaussianLaw::sample(Stream& rng) const { return sigma_ * standard_normal(rng); }

Estimate GaussianLaw::log_prob(const Band& band) const {
  if (band.empty()) return {-kInf, 0.0, true};
  const double a = band.lo / sigma_;
  const double b = band.hi / sigma_;
  return {std::numbers::ln2 + log_sub_exp(log_normal_q(a), log_normal_q(b)), 0.0, true};
}

Estimate GaussianLaw::prob(const Band& band) const {
  return {std::exp(log_prob(band).value), 0.0, true};
}

Estimate GaussianLaw::moment(const Band& band, int power) const {
  if (power == 1 || band.empty()) return {0.0, 0.0, true};
  if (power != 2) throw std::invalid_argument("moment: power must be 1 or 2");
  // E[Z^2 1{Z > t}] = t phi(t) + Q(t).
  auto upper = [](double t) { return std::isinf(t) ? 0.0 : t * normal_pdf(t) + normal_q(t); };
  const double a = band.lo / sigma_;
  const double b = band.hi / sigma_;
  return {2.0 * sigma_ * sigma_ * (upper(a) - upper(b)), 0.0, true};
}

Estimate GaussianLaw::abs_moment(const Band& band, double power) const {
  if (band.empty()) return {0.0, 0.0, true};
  const double a = band.lo / sigma_;
  const double b = band.hi / sigma_;
  if (power == 1.0) return {2.0 * sigma_ * (normal_pdf(a) - normal_pdf(b)), 0.0, true};
  if (power == 2.0) return moment(band, 2);
  if (a == 0.0 && std::isinf(b)) {
    const double m = std::pow(sigma_, power) * std::pow(2.0, power / 2.0) *
                     std::tgamma((power + 1.0) / 2.0) / std::sqrt(std::numbers::pi);
    return {m, 0.0, true};
  }
  return EntryLaw::abs_moment(band, power);
}

Estimate GaussianLaw::log_exp_moment(double lambda, const Band& band) const {
  if (band.empty()) return {-kInf, 0.0, true};
  // E[e^{mu |Z|} 1{a < |Z| < b}] = 2 e^{mu^2/2} (Q(a - mu) - Q(b - mu)).
  const double mu = lambda * sigma_;
  const double a = band.lo / sigma_;
  const double b = band.hi / sigma_;
  return {std::numbers::ln2 + 0.5 * mu * mu + log_sub_exp(log_normal_q(a - mu), log_normal_q(b - mu)),
          0.0, true};
}

double GaussianLaw::log_mgf(double theta) const { return 0.5 * theta * theta * sigma_ * sigma_; }
double GaussianLaw::dlog_mgf(double theta) const { return theta * sigma_ * sigma_; }
double GaussianLaw::d2log_mgf(double) const { return sigma_ * sigma_; }

double GaussianLaw::sample_tilted(double theta, Stream& rng) const {
  if (theta == 0.0) return sample(rng);
  return theta * sigma_ * sigma_ + sigma_ * standard_normal(rng);
}

// ---------------------------------------------------------------------------
// Two-point

TwoPointLaw::TwoPointLaw(double x1, double p1, double x2) : x1_(x1), p1_(p1), x2_(x2) {
  if (!(p1 > 0.0 && p1 < 1.0)) throw std::invalid_argument("two-point: p1 must be in (0,1)");
  const double mean = x1 * p1 + x2 * (1.0 - p1);
  if (std::abs(mean) > 1e-12 * std::max({1.0, std::abs(x1), std::abs(x2)}))
    throw std::invalid_argument("two-point: law must be centered");
}

std::shared_ptr<TwoPointLaw> TwoPointLaw::rademacher(double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("rademacher: scale must be positive");
  return std::make_shared<TwoPointLaw>(scale, 0.5, -scale);
}

std::string TwoPointLaw::describe() const {
  return "two_point(" + fmt(x1_) + "," + fmt(p1_) + "," + fmt(x2_) + ")";
}

double TwoPointLaw::variance() const { return p1_ * x1_ * x1_ + (1.0 - p1_) * x2_ * x2_; }

double TwoPointLaw::sup_abs() const { return std::max(std::abs(x1_), std::abs(x2_)); }

double TwoPointLaw::sample(Stream& rng) const { return uniform01(rng) < p1_ ? x1_ : x2_; }

Estimate TwoPointLaw::prob(const Band& band) const {
  double p = 0.0;
  if (band.contains(std::abs(x1_))) p += p1_;
  if (band.contains(std::abs(x2_))) p += 1.0 - p1_;
  return {p, 0.0, true};
}

Estimate TwoPointLaw::log_prob(const Band& band) const {
  double lp = -kInf;
  if (band.contains(std::abs(x1_))) lp = log_add_exp(lp, std::log(p1_));
  if (band.contains(std::abs(x2_))) lp = log_add_exp(lp, std::log1p(-p1_));
  return {lp, 0.0, true};
}

Estimate TwoPointLaw::moment(const Band& band, int power) const {
  if (power != 1 && power != 2) throw std::invalid_argument("moment: power must be 1 or 2");
  double m = 0.0;
  if (band.contains(std::abs(x1_))) m += p1_ * std::pow(x1_, power);
  if (band.contains(std::abs(x2_))) m += (1.0 - p1_) * std::pow(x2_, power);
  return {m, 0.0, true};
}

Estimate TwoPointLaw::abs_moment(const Band& band, double power) const {
  double m = 0.0;
  if (band.contains(std::abs(x1_))) m += p1_ * std::pow(std::abs(x1_), power);
  if (band.contains(std::abs(x2_))) m += (1.0 - p1_) * std::pow(std::abs(x2_), power);
  return {m, 0.0, true};
}

Estimate TwoPointLaw::log_exp_moment(double lambda, const Band& band) const {
  double lm = -kInf;
  if (band.contains(std::abs(x1_))) lm = log_add_exp(lm, std::log(p1_) + lambda * std::abs(x1_));
  if (band.contains(std::abs(x2_))) lm = log_add_exp(lm, std::log1p(-p1_) + lambda * std::abs(x2_));
  return {lm, 0.0, true};
}

double TwoPointLaw::log_mgf(double theta) const {
  return log_add_exp(std::log(p1_) + theta * x1_, std::log1p(-p1_) + theta * x2_);
}

double TwoPointLaw::tilted_p1(double theta) const {
  return std::exp(std::log(p1_) + theta * x1_ - log_mgf(theta));
}

double TwoPointLaw::dlog_mgf(double theta) const {
  const double q = tilted_p1(theta);
  return q * x1_ + (1.0 - q) * x2_;
}

double TwoPointLaw::d2log_mgf(double theta) const {
  const double q = tilted_p1(theta);
  const double d = x1_ - x2_;
  return q * (1.0 - q) * d * d;
}

double TwoPointLaw::sample_tilted(double theta, Stream& rng) const {
  if (theta == 0.0) return sample(rng);
  return uniform01(rng) < tilted_p1(theta) ? x1_ : x2_;
}

// ---------------------------------------------------------------------------
// Centered exponential: X = c (E - 1)

namespace {

struct Interval {
  double l, r;
  [[nodiscard]] bool empty() const { return !(r > l); }
};

// E-intervals on which |E - 1| lies in (a, b): the upper branch and, when a < 1, the lower one.
std::pair<Interval, Interval> exponential_pieces(double a, double b) {
  Interval upper{1.0 + a, 1.0 + b};
  Interval lower{0.0, 0.0};
  if (a < 1.0) lower = {std::max(0.0, 1.0 - b), 1.0 - a};
  return {upper, lower};
}

double log_j0(const Interval& iv) {  // log of integral of e^{-e} over iv
  if (iv.empty()) return -kInf;
  return log_sub_exp(-iv.l, -iv.r);
}

double j1(const Interval& iv) {  // integral of (e - 1) e^{-e}
  if (iv.empty()) return 0.0;
  const double hi = std::isinf(iv.r) ? 0.0 : iv.r * std::exp(-iv.r);
  return iv.l * std::exp(-iv.l) - hi;
}

double j2(const Interval& iv) {  // integral of (e - 1)^2 e^{-e}
  if (iv.empty()) return 0.0;
  const double hi = std::isinf(iv.r) ? 0.0 : std::exp(-iv.r) * (iv.r * iv.r + 1.0);
  return std::exp(-iv.l) * (iv.l * iv.l + 1.0) - hi;
}

}  // namespace

CenteredExponentialLaw::CenteredExponentialLaw(double c) : c_(c) {
  if (c == 0.0 || !std::isfinite(c))
    throw std::invalid_argument("centered exponential: scale must be finite and nonzero");
}

std::string CenteredExponentialLaw::describe() const {
  return "centered_exponential(" + fmt(c_) + ")";
}

double CenteredExponentialLaw::sample(Stream& rng) const {
  return c_ * (standard_exponential(rng) - 1.0);
}

Estimate CenteredExponentialLaw::log_prob(const Band& band) const {
  if (band.empty()) return {-kInf, 0.0, true};
  const double s = std::abs(c_);
  const auto [up, lo] = exponential_pieces(band.lo / s, band.hi / s);
  return {log_add_exp(log_j0(up), log_j0(lo)), 0.0, true};
}

Estimate CenteredExponentialLaw::prob(const Band& band) const {
  return {std::exp(log_prob(band).value), 0.0, true};
}

Estimate CenteredExponentialLaw::moment(const Band& band, int power) const {
  if (power != 1 && power != 2) throw std::invalid_argument("moment: power must be 1 or 2");
  if (band.empty()) return {0.0, 0.0, true};
  const double s = std::abs(c_);
  const auto [up, lo] = exponential_pieces(band.lo / s, band.hi / s);
  if (power == 1) return {c_ * (j1(up) + j1(lo)), 0.0, true};
  return {c_ * c_ * (j2(up) + j2(lo)), 0.0, true};
}

Estimate CenteredExponentialLaw::abs_moment(const Band& band, double power) const {
  if (band.empty()) return {0.0, 0.0, true};
  const double s = std::abs(c_);
  const auto [up, lo] = exponential_pieces(band.lo / s, band.hi / s);
  if (power == 1.0) return {s * (j1(up) - j1(lo)), 0.0, true};
  if (power == 2.0) return {s * s * (j2(up) + j2(lo)), 0.0, true};
  return EntryLaw::abs_moment(band, power);
}

Estimate CenteredExponentialLaw::log_exp_moment(double lambda, const Band& band) const {
  if (band.empty()) return {-kInf, 0.0, true};
  const double s = std::abs(c_);
  const double mu = lambda * s;
  const auto [up, lo] = exponential_pieces(band.lo / s, band.hi / s);

  // Upper branch: e^{-mu} * integral of e^{-(1 - mu) e}.
  double lu = -kInf;
  if (!up.empty()) {
    const double kappa = 1.0 - mu;
    if (kappa > 0.0) {
      lu = -mu - std::log(kappa) + log_sub_exp(-kappa * up.l, -kappa * up.r);
    } else if (std::isinf(up.r)) {
      return {kInf, 0.0, true};
    } else if (kappa == 0.0) {
      lu = -mu + std::log(up.r - up.l);
    } else {
      lu = -mu - std::log(-kappa) + log_sub_exp(-kappa * up.r, -kappa * up.l);
    }
  }
  // Lower branch: e^{mu} * integral of e^{-(1 + mu) e} over a subset of [0, 1].
  double ll = -kInf;
  if (!lo.empty()) {
    const double k = 1.0 + mu;
    ll = mu - std::log(k) + log_sub_exp(-k * lo.l, -k * lo.r);
  }
  return {log_add_exp(lu, ll), 0.0, true};
}

std::pair<double, double> CenteredExponentialLaw::mgf_domain() const {
  if (c_ > 0.0) return {-kInf, 1.0 / c_};
  return {1.0 / c_, kInf};
}

double CenteredExponentialLaw::log_mgf(double theta) const {
  const double tc = theta * c_;
  if (tc >= 1.0) return kInf;
  return -tc - std::log1p(-tc);
}

double CenteredExponentialLaw::dlog_mgf(double theta) const {
  const double tc = theta * c_;
  if (tc >= 1.0) return kInf;
  return -c_ + c_ / (1.0 - tc);
}

double CenteredExponentialLaw::d2log_mgf(double theta) const {
  const double tc = theta * c_;
  if (tc >= 1.0) return kInf;
  return c_ * c_ / ((1.0 - tc) * (1.0 - tc));
}

double CenteredExponentialLaw::sample_tilted(double theta, Stream& rng) const {
  if (theta == 0.0) return sample(rng);
  const double rate = 1.0 - theta * c_;
  if (!(rate > 0.0)) throw std::domain_error("centered exponential: tilt outside mgf domain");
  return c_ * (standard_exponential(rng) / rate - 1.0);
}

// ---------------------------------------------------------------------------
// Uniform on [-b, b]

UniformLaw::UniformLaw(double half_width) : b_(half_width) {
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    throw std::invalid_argument("uniform: half width must be positive");
}

std::string UniformLaw::describe() const { return "uniform(" + fmt(b_) + ")"; }

double UniformLaw::sample(Stream& rng) const { return b_ * (2.0 * uniform01(rng) - 1.0); }

Estimate UniformLaw::prob(const Band& band) const {
  const double l = std::clamp(band.lo, 0.0, b_);
  const double r = std::clamp(band.hi, 0.0, b_);
  return {r > l ? (r - l) / b_ : 0.0, 0.0, true};
}

Estimate UniformLaw::log_prob(const Band& band) const { return log_of(prob(band)); }

Estimate UniformLaw::moment(const Band& band, int power) const {
  if (power == 1) return {0.0, 0.0, true};
  if (power != 2) throw std::invalid_argument("moment: power must be 1 or 2");
  return abs_moment(band, 2.0);
}

Estimate UniformLaw::abs_moment(const Band& band, double power) const {
  const double l = std::clamp(band.lo, 0.0, b_);
  const double r = std::clamp(band.hi, 0.0, b_);
  if (!(r > l)) return {0.0, 0.0, true};
  return {(std::pow(r, power + 1) - std::pow(l, power + 1)) / ((power + 1) * b_), 0.0, true};
}

Estimate UniformLaw::log_exp_moment(double lambda, const Band& band) const {
  const double l = std::clamp(band.lo, 0.0, b_);
  const double r = std::clamp(band.hi, 0.0, b_);
  if (!(r > l)) return {-kInf, 0.0, true};
  if (lambda == 0.0) return {std::log((r - l) / b_), 0.0, true};
  return {log_sub_exp(lambda * r, lambda * l) - std::log(lambda * b_), 0.0, true};
}

double UniformLaw::log_mgf(double theta) const {
  const double t = std::abs(theta * b_);
  if (t < 1e-4) return t * t / 6.0 - t * t * t * t / 180.0;
  // log(sinh(t)/t) = t - log 2 + log(1 - e^{-2t}) - log t
  return t - std::numbers::ln2 + std::log1p(-std::exp(-2.0 * t)) - std::log(t);
}

double UniformLaw::dlog_mgf(double theta) const {
  const double t = theta * b_;
  if (std::abs(t) < 1e-4) return b_ * (t / 3.0 - t * t * t / 45.0);
  return b_ / std::tanh(t) - 1.0 / theta;
}

double UniformLaw::d2log_mgf(double theta) const {
  const double t = theta * b_;
  if (std::abs(t) < 1e-4) return b_ * b_ * (1.0 / 3.0 - t * t / 15.0);
  const double sh = std::sinh(t);
  return 1.0 / (theta * theta) - b_ * b_ / (sh * sh);
}

double UniformLaw::sample_tilted(double theta, Stream& rng) const {
  if (theta == 0.0) return sample(rng);
  const double u = uniform01(rng);
  const double k = std::abs(theta);
  // Inverse CDF of the density proportional to e^{k x} on [-b, b].
  const double x = b_ + std::log(u + (1.0 - u) * std::exp(-2.0 * k * b_)) / k;
  return theta > 0.0 ? x : -x;
}

// ---------------------------------------------------------------------------
// Zero

Estimate ZeroLaw::prob(const Band& band) const { return {band.contains(0.0) ? 1.0 : 0.0, 0.0, true}; }

Estimate ZeroLaw::log_prob(const Band& band) const {
  return {band.contains(0.0) ? 0.0 : -kInf, 0.0, true};
}

Estimate ZeroLaw::abs_moment(const Band&, double) const { return {}; }

Estimate ZeroLaw::log_exp_moment(double, const Band& band) const { return log_prob(band); }

// ---------------------------------------------------------------------------
// Kernels

KernelShape parse_kernel(const std::string& name) {
  if (name == "uniform") return KernelShape::uniform;
  if (name == "gaussian") return KernelShape::gaussian;
  if (name == "epanechnikov") return KernelShape::epanechnikov;
  throw std::invalid_argument("unknown kernel '" + name + "'");
}

std::string to_string(KernelShape k) {
  switch (k) {
    case KernelShape::uniform: return "uniform";
    case KernelShape::gaussian: return "gaussian";
    case KernelShape::epanechnikov: return "epanechnikov";
  }
  return "?";
}

double kernel_value(KernelShape k, double u) {
  switch (k) {
    case KernelShape::uniform: return std::abs(u) <= 0.5 ? 1.0 : 0.0;
    case KernelShape::gaussian: return normal_pdf(u);
    case KernelShape::epanechnikov: return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
  }
  return 0.0;
}

double kernel_sup(KernelShape k) {
  switch (k) {
    case KernelShape::uniform: return 1.0;
    case KernelShape::gaussian: return normal_pdf(0.0);
    case KernelShape::epanechnikov: return 0.75;
  }
  return 0.0;
}

double kernel_l2(KernelShape k) {
  switch (k) {
    case KernelShape::uniform: return 1.0;
    case KernelShape::gaussian: return 0.5 / std::sqrt(std::numbers::pi);
    case KernelShape::epanechnikov: return 0.6;
  }
  return 0.0;
}

namespace {

double normal_density(double x, double mu, double var) {
  const double sd = std::sqrt(var);
  return normal_pdf((x - mu) / sd) / sd;
}

// h * integral of K(u)^power f(x - h u) du.
double kernel_expectation(KernelShape k, int power, double mu, double sd, double x, double h) {
  using boost::math::quadrature::gauss_kronrod;
  auto integrand = [&](double u) {
    return std::pow(kernel_value(k, u), power) * normal_density(x - h * u, mu, sd * sd);
  };
  double err = 0.0;
  double v = 0.0;
  switch (k) {
    case KernelShape::uniform:
      v = gauss_kronrod<double, 61>::integrate(integrand, -0.5, 0.5, 15, 1e-12, &err);
      break;
    case KernelShape::epanechnikov:
      v = gauss_kronrod<double, 61>::integrate(integrand, -1.0, 1.0, 15, 1e-12, &err);
      break;
    case KernelShape::gaussian:
      v = gauss_kronrod<double, 61>::integrate(integrand, -kInf, kInf, 15, 1e-12, &err);
      break;
  }
  if (err * h > 1e-10) throw std::runtime_error("kernel quadrature did not reach 1e-10");
  return h * v;
}

}  // namespace

KernelLaw::KernelLaw(KernelShape kernel, double mu, double sd, double x, double h)
    : kernel_(kernel), mu_(mu), sd_(sd), x_(x), h_(h) {
  if (!(h > 0.0)) throw std::invalid_argument("kernel: bandwidth must be positive");
  if (!(sd > 0.0)) throw std::invalid_argument("kernel: density sd must be positive");
  double ek2 = 0.0;
  switch (kernel_) {
    case KernelShape::uniform:
      mean_k_ = normal_q((x - 0.5 * h - mu) / sd) - normal_q((x + 0.5 * h - mu) / sd);
      ek2 = mean_k_;
      break;
    case KernelShape::gaussian:
      mean_k_ = h * normal_density(x, mu, sd * sd + h * h);
      ek2 = h * kernel_l2(kernel_) * normal_density(x, mu, sd * sd + 0.5 * h * h);
      break;
    case KernelShape::epanechnikov:
      mean_k_ = kernel_expectation(kernel_, 1, mu, sd, x, h);
      ek2 = kernel_expectation(kernel_, 2, mu, sd, x, h);
      break;
  }
  variance_ = (ek2 - mean_k_ * mean_k_) / h;
}

double KernelLaw::kernel_mean_quadrature() const {
  return kernel_expectation(kernel_, 1, mu_, sd_, x_, h_);
}

std::string KernelLaw::describe() const {
  return "kernel(" + to_string(kernel_) + "," + fmt(mu_) + "," + fmt(sd_) + "," + fmt(x_) + "," +
         fmt(h_) + ")";
}

double KernelLaw::sup_abs() const {
  return std::max(kernel_sup(kernel_) - mean_k_, mean_k_) / std::sqrt(h_);
}

double KernelLaw::sample(Stream& rng) const {
  const double draw = mu_ + sd_ * standard_normal(rng);
  return (kernel_value(kernel_, (x_ - draw) / h_) - mean_k_) / std::sqrt(h_);
}

// ---------------------------------------------------------------------------
// Chain block sums

ChainBlockLaw::ChainBlockLaw(FiniteMarkovChain chain, int length)
    : chain_(std::move(chain)), length_(length) {
  if (length < 1) throw std::invalid_argument("chain block: length must be >= 1");
  const std::size_t s = chain_.size();
  const auto& p = chain_.transition();
  const auto v = chain_.values();
  const auto pi = chain_.stationary();
  // Var(S_p) = p Var + 2 sum_{k<p} (p - k) Cov_k, with Cov_k from iterated P^k v.
  std::vector<double> w(v.begin(), v.end());
  auto cov_of = [&](const std::vector<double>& pw) {
    double c = 0.0;
    for (std::size_t x = 0; x < s; ++x) c += pi[x] * v[x] * pw[x];
    return c;
  };
  double var = length_ * cov_of(w);
  for (int k = 1; k < length_; ++k) {
    std::vector<double> next(s, 0.0);
    for (std::size_t x = 0; x < s; ++x)
      for (std::size_t y = 0; y < s; ++y) next[x] += p[x][y] * w[y];
    w = std::move(next);
    var += 2.0 * (length_ - k) * cov_of(w);
  }
  variance_ = var;
}

std::string ChainBlockLaw::describe() const {
  std::string d = "chain_block(" + std::to_string(length_) + ";";
  for (double v : chain_.values()) d += fmt(v) + ",";
  for (const auto& row : chain_.transition())
    for (double x : row) d += fmt(x) + ",";
  return d + ")";
}

double ChainBlockLaw::sup_abs() const { return length_ * chain_.sup_norm(); }

double ChainBlockLaw::sample(Stream& rng) const {
  std::size_t state = chain_.draw_stationary(rng);
  double sum = chain_.values()[state];
  for (int i = 1; i < length_; ++i) {
    state = chain_.step(state, uniform01(rng));
    sum += chain_.values()[state];
  }
  return sum;
}

double ChainBlockLaw::log_mgf(double theta) const {
  // pi D (P D)^{p-1} 1 with D = diag(e^{theta v}), renormalized each step.
  const std::size_t s = chain_.size();
  const auto& p = chain_.transition();
  const auto v = chain_.values();
  std::vector<double> w(s);
  double log_scale = 0.0;
  auto renormalize = [&] {
    const double m = *std::max_element(w.begin(), w.end());
    for (double& x : w) x /= m;
    log_scale += std::log(m);
  };
  for (std::size_t x = 0; x < s; ++x) w[x] = std::exp(theta * v[x]);
  renormalize();
  for (int i = 1; i < length_; ++i) {
    std::vector<double> next(s, 0.0);
    for (std::size_t x = 0; x < s; ++x) {
      for (std::size_t y = 0; y < s; ++y) next[x] += p[x][y] * w[y];
      next[x] *= std::exp(theta * v[x]);
    }
    w = std::move(next);
    renormalize();
  }
  double total = 0.0;
  for (std::size_t x = 0; x < s; ++x) total += chain_.stationary()[x] * w[x];
  return std::log(total) + log_scale;
}

// Central differences on the exact transfer-matrix cumulant.
double ChainBlockLaw::dlog_mgf(double theta) const {
  const double h = 1e-5 * std::max(1.0, std::abs(theta));
  return (log_mgf(theta + h) - log_mgf(theta - h)) / (2.0 * h);
}

double ChainBlockLaw::d2log_mgf(double theta) const {
  const double h = 1e-4 * std::max(1.0, std::abs(theta));
  return (log_mgf(theta + h) - 2.0 * log_mgf(theta) + log_mgf(theta - h)) / (h * h);
}

// ---------------------------------------------------------------------------

McOnlyLaw::McOnlyLaw(LawPtr inner) : inner_(std::move(inner)) {
  if (!inner_) throw std::invalid_argument("mc-only: null law");
}

std::string McOnlyLaw::describe() const { return "mc(" + inner_->describe() + ")"; }

}  // namespace mdplab
