#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>

#include "mdplab/markov_chain.hpp"
#include "mdplab/numeric.hpp"
#include "mdplab/rng.hpp"

namespace mdplab {

/// A value with its standard error. `exact` distinguishes closed-form
/// results (se == 0) from Monte Carlo estimates; callers must branch on it.
struct Estimate {
  double value = 0.0;
  double se = 0.0;
  bool exact = true;
};

/// A set of magnitudes {|x| : lo <(=) |x| <(=) hi}.
struct Band {
  double lo = 0.0;
  bool lo_closed = true;
  double hi = kInf;
  bool hi_closed = false;

  static Band all() { return {}; }
  static Band above(double x) { return {x, false, kInf, false}; }     // |X| > x
  static Band at_least(double x) { return {x, true, kInf, false}; }   // |X| >= x
  static Band at_most(double x) { return {0.0, true, x, true}; }      // |X| <= x
  static Band open(double lo, double hi) { return {lo, false, hi, false}; }

  [[nodiscard]] bool contains(double magnitude) const;
  [[nodiscard]] bool empty() const;
};

inline constexpr std::size_t kDefaultMcSamples = 200000;

/// Law of a single centered array entry X_nj.
///
/// The defaults of every band functional are Monte Carlo estimates drawn
/// from `sample` on a stream keyed by `describe()`, so they are
/// reproducible. Families with closed forms override them and report
/// `exact = true`.
class EntryLaw {
 public:
  virtual ~EntryLaw() = default;

  [[nodiscard]] virtual std::string describe() const = 0;
  [[nodiscard]] virtual double variance() const = 0;
  /// ess sup |X|; infinity when unbounded.
  [[nodiscard]] virtual double sup_abs() const = 0;
  [[nodiscard]] virtual double sample(Stream& rng) const = 0;
  [[nodiscard]] virtual bool exact_tails() const { return false; }

  /// P(|X| in band).
  [[nodiscard]] virtual Estimate prob(const Band& band) const;
  /// log P(|X| in band); for MC the se is the relative error se(p)/p.
  [[nodiscard]] virtual Estimate log_prob(const Band& band) const;
  /// E[X^power 1{|X| in band}] for power 1 or 2.
  [[nodiscard]] virtual Estimate moment(const Band& band, int power) const;
  /// E[|X|^power 1{|X| in band}].
  [[nodiscard]] virtual Estimate abs_moment(const Band& band, double power) const;
  /// log E[exp(lambda |X|) 1{|X| in band}], lambda >= 0. Throws
  /// UnavailableError for unbounded laws without a closed form.
  [[nodiscard]] virtual Estimate log_exp_moment(double lambda, const Band& band) const;

  // Cumulant generating function psi(theta) = log E exp(theta X).
  [[nodiscard]] virtual bool has_mgf() const { return false; }
  /// Open interval of theta where psi is finite.
  [[nodiscard]] virtual std::pair<double, double> mgf_domain() const { return {-kInf, kInf}; }
  [[nodiscard]] virtual double log_mgf(double theta) const;
  [[nodiscard]] virtual double dlog_mgf(double theta) const;
  [[nodiscard]] virtual double d2log_mgf(double theta) const;

  /// Sampling under the exponentially tilted law exp(theta x - psi(theta)) P(dx).
  /// theta == 0 must consume the stream exactly like `sample`.
  [[nodiscard]] virtual bool can_tilt() const { return false; }
  [[nodiscard]] virtual double sample_tilted(double theta, Stream& rng) const;

 protected:
  template <class F>
  Estimate mc_mean(F&& f, std::uint64_t tag, std::size_t samples = kDefaultMcSamples) const;
};

using LawPtr = std::shared_ptr<const EntryLaw>;

/// c * N(0, sigma^2) collapsed to N(0, sigma^2).
class GaussianLaw final : public EntryLaw {
 public:
  explicit GaussianLaw(double sigma);
  std::string describe() const override;
  double variance() const override { return sigma_ * sigma_; }
  double sup_abs() const override { return kInf; }
  double sample(Stream& rng) const override;
  bool exact_tails() const override { return true; }
  Estimate prob(const Band& band) const override;
  Estimate log_prob(const Band& band) const override;
  Estimate moment(const Band& band, int power) const override;
  Estimate abs_moment(const Band& band, double power) const override;
  Estimate log_exp_moment(double lambda, const Band& band) const override;
  bool has_mgf() const override { return true; }
  double log_mgf(double theta) const override;
  double dlog_mgf(double theta) const override;
  double d2log_mgf(double theta) const override;
  bool can_tilt() const override { return true; }
  double sample_tilted(double theta, Stream& rng) const override;
  [[nodiscard]] double sigma() const { return sigma_; }

 private:
  double sigma_;
};

/// Centered two-point law: x1 with probability p1, x2 otherwise.
/// Covers scaled Rademacher entries and uniform-kernel rows.
class TwoPointLaw final : public EntryLaw {
 public:
  TwoPointLaw(double x1, double p1, double x2);
  static std::shared_ptr<TwoPointLaw> rademacher(double scale);

  std::string describe() const override;
  double variance() const override;
  double sup_abs() const override;
  double sample(Stream& rng) const override;
  bool exact_tails() const override { return true; }
  Estimate prob(const Band& band) const override;
  Estimate log_prob(const Band& band) const override;
  Estimate moment(const Band& band, int power) const override;
  Estimate abs_moment(const Band& band, double power) const override;
  Estimate log_exp_moment(double lambda, const Band& band) const override;
  bool has_mgf() const override { return true; }
  double log_mgf(double theta) const override;
  double dlog_mgf(double theta) const override;
  double d2log_mgf(double theta) const override;
  bool can_tilt() const override { return true; }
  double sample_tilted(double theta, Stream& rng) const override;

 private:
  [[nodiscard]] double tilted_p1(double theta) const;
  double x1_, p1_, x2_;
};

/// X = c (E - 1) with E unit-mean exponential.
class CenteredExponentialLaw final : public EntryLaw {
 public:
  explicit CenteredExponentialLaw(double c);
  std::string describe() const override;
  double variance() const override { return c_ * c_; }
  double sup_abs() const override { return kInf; }
  double sample(Stream& rng) const override;
  bool exact_tails() const override { return true; }
  Estimate prob(const Band& band) const override;
  Estimate log_prob(const Band& band) const override;
  Estimate moment(const Band& band, int power) const override;
  Estimate abs_moment(const Band& band, double power) const override;
  Estimate log_exp_moment(double lambda, const Band& band) const override;
  bool has_mgf() const override { return true; }
  std::pair<double, double> mgf_domain() const override;
  double log_mgf(double theta) const override;
  double dlog_mgf(double theta) const override;
  double d2log_mgf(double theta) const override;
  bool can_tilt() const override { return true; }
  double sample_tilted(double theta, Stream& rng) const override;

 private:
  double c_;
};

/// Uniform on [-b, b].
class UniformLaw final : public EntryLaw {
 public:
  explicit UniformLaw(double half_width);
  std::string describe() const override;
  double variance() const override { return b_ * b_ / 3.0; }
  double sup_abs() const override { return b_; }
  double sample(Stream& rng) const override;
  bool exact_tails() const override { return true; }
  Estimate prob(const Band& band) const override;
  Estimate log_prob(const Band& band) const override;
  Estimate moment(const Band& band, int power) const override;
  Estimate abs_moment(const Band& band, double power) const override;
  Estimate log_exp_moment(double lambda, const Band& band) const override;
  bool has_mgf() const override { return true; }
  double log_mgf(double theta) const override;
  double dlog_mgf(double theta) const override;
  double d2log_mgf(double theta) const override;
  bool can_tilt() const override { return true; }
  double sample_tilted(double theta, Stream& rng) const override;

 private:
  double b_;
};

/// Point mass at zero.
class ZeroLaw final : public EntryLaw {
 public:
  std::string describe() const override { return "zero"; }
  double variance() const override { return 0.0; }
  double sup_abs() const override { return 0.0; }
  double sample(Stream&) const override { return 0.0; }
  bool exact_tails() const override { return true; }
  Estimate prob(const Band& band) const override;
  Estimate log_prob(const Band& band) const override;
  Estimate moment(const Band&, int) const override { return {}; }
  Estimate abs_moment(const Band& band, double power) const override;
  Estimate log_exp_moment(double lambda, const Band& band) const override;
  bool has_mgf() const override { return true; }
  double log_mgf(double) const override { return 0.0; }
  double dlog_mgf(double) const override { return 0.0; }
  double d2log_mgf(double) const override { return 0.0; }
  bool can_tilt() const override { return true; }
  double sample_tilted(double, Stream&) const override { return 0.0; }
};

enum class KernelShape { uniform, gaussian, epanechnikov };

KernelShape parse_kernel(const std::string& name);
std::string to_string(KernelShape k);
double kernel_value(KernelShape k, double u);
/// sup |K|.
double kernel_sup(KernelShape k);
/// Integral of K^2.
double kernel_l2(KernelShape k);

/// Y = (K((x - X)/h) - E K((x - X)/h)) / sqrt(h), X ~ N(mu, sd^2).
///
/// Centering and variance are closed-form for the uniform and gaussian
/// kernels and adaptive Gauss-Kronrod (abs tol 1e-10) otherwise. Tails go
/// through Monte Carlo.
class KernelLaw final : public EntryLaw {
 public:
  KernelLaw(KernelShape kernel, double mu, double sd, double x, double h);
  std::string describe() const override;
  double variance() const override { return variance_; }
  double sup_abs() const override;
  double sample(Stream& rng) const override;
  [[nodiscard]] double kernel_mean() const { return mean_k_; }

  /// E K((x - X)/h) by quadrature, whatever the kernel (test cross-check).
  [[nodiscard]] double kernel_mean_quadrature() const;

 private:
  KernelShape kernel_;
  double mu_, sd_, x_, h_;
  double mean_k_ = 0.0;
  double variance_ = 0.0;
};

/// Sum of `length` consecutive values of a stationary finite chain.
/// Variance and cumulant generating function are exact (transfer matrix);
/// tails go through Monte Carlo.
class ChainBlockLaw final : public EntryLaw {
 public:
  ChainBlockLaw(FiniteMarkovChain chain, int length);
  std::string describe() const override;
  double variance() const override { return variance_; }
  double sup_abs() const override;
  double sample(Stream& rng) const override;
  bool has_mgf() const override { return true; }
  double log_mgf(double theta) const override;
  double dlog_mgf(double theta) const override;
  double d2log_mgf(double theta) const override;

 private:
  FiniteMarkovChain chain_;
  int length_;
  double variance_;
};

/// Hides every closed form of the wrapped law; only sampling, variance and
/// the support bound remain.
class McOnlyLaw final : public EntryLaw {
 public:
  explicit McOnlyLaw(LawPtr inner);
  std::string describe() const override;
  double variance() const override { return inner_->variance(); }
  double sup_abs() const override { return inner_->sup_abs(); }
  double sample(Stream& rng) const override { return inner_->sample(rng); }

 private:
  LawPtr inner_;
};

/// Monte Carlo mean of f(X) over `samples` draws on a stream keyed by (law, tag).
template <class F>
Estimate EntryLaw::mc_mean(F&& f, std::uint64_t tag, std::size_t samples) const {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : describe()) h = (h ^ ch) * 1099511628211ULL;
  Stream rng(derive_key(h, {tag}));
  CompensatedSum s1, s2;
  for (std::size_t i = 0; i < samples; ++i) {
    const double v = f(sample(rng));
    s1.add(v);
    s2.add(v * v);
  }
  const double n = static_cast<double>(samples);
  const double mean = s1.value() / n;
  const double var = std::max(0.0, s2.value() / n - mean * mean) * n / (n - 1.0);
  return {mean, std::sqrt(var / n), false};
}

}  // namespace mdplab
