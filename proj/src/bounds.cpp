#include "mdplab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "mdplab/json_util.hpp"
#include "mdplab/numeric.hpp"
#include "mdplab/rng.hpp"

namespace mdplab {

double prokhorov_bound(double t, double B, double s2) {
  if (!(t > 0.0) || !(B > 0.0) || !(s2 > 0.0)) throw std::invalid_argument("prokhorov: t, B and s2 must be positive");
  return std::min(1.0, std::exp(-(t / (2.0 * B)) * std::asinh(B * t / (2.0 * s2))));
}

double geo_tau_c2(double rho, double sup_norm) {
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("geo_tau: rho must lie in (0, 1)");
  if (!(sup_norm > 0.0)) throw std::invalid_argument("geo_tau: sup_norm must be positive");
  return std::sqrt(std::log(1.0 / rho)) / (std::numbers::e * sup_norm);
}

double geo_tau_max_bound(double x, double m, double rho, double sup_norm, double K) {
  const double c2 = geo_tau_c2(rho, sup_norm);
  if (!(m > 0.0) || !(K > 0.0) || x < 0.0) throw std::invalid_argument("geo_tau: x >= 0, m > 0 and K > 0 required");
  return std::min(1.0, K * std::exp(-c2 * x / std::sqrt(m)));
}

BoundCurve BoundCurve::prokhorov(double B, double s2) {
  BoundCurve c;
  c.kind = Kind::prokhorov;
  c.B = B;
  c.s2 = s2;
  return c;
}

BoundCurve BoundCurve::geo_tau_max(double m, double rho, double sup_norm, double K) {
  BoundCurve c;
  c.kind = Kind::geo_tau_max;
  c.m = m;
  c.rho = rho;
  c.sup_norm = sup_norm;
  c.K = K;
  return c;
}

double BoundCurve::operator()(double t) const {
  if (kind == Kind::prokhorov) return t <= 0.0 ? 1.0 : prokhorov_bound(t, B, s2);
  return geo_tau_max_bound(std::max(0.0, t), m, rho, sup_norm, K);
}

std::string BoundCurve::to_csv(std::span<const double> ts) const {
  std::ostringstream os;
  os << "t,bound\n";
  for (double t : ts) os << format_real(t) << ',' << format_real((*this)(t)) << '\n';
  return os.str();
}

double calibrate_geo_tau_K(std::span<const double> x, std::span<const double> p, double m, double rho,
                           double sup_norm) {
  if (x.size() != p.size() || x.empty()) throw std::invalid_argument("calibration: need matching nonempty pilot");
  const double c2 = geo_tau_c2(rho, sup_norm);
  double K = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) K = std::max(K, p[i] * std::exp(c2 * x[i] / std::sqrt(m)));
  return K;
}

std::vector<Estimate> chain_max_tail(const FiniteMarkovChain& chain, long long m, std::span<const double> x,
                                     long long replicas, std::uint64_t seed) {
  if (m < 1 || replicas < 2) throw std::invalid_argument("chain_max_tail: m >= 1 and replicas >= 2 required");
  std::vector<double> maxima(static_cast<std::size_t>(replicas));
  const auto v = chain.values();
#pragma omp parallel for schedule(static)
  for (long long r = 0; r < replicas; ++r) {
    Stream rng(derive_key(seed, {static_cast<std::uint64_t>(r)}));
    std::size_t state = chain.draw_stationary(rng);
    double s = 0.0, best = 0.0;
    for (long long j = 0; j < m; ++j) {
      if (j > 0) state = chain.step(state, uniform01(rng));
      s += v[state];
      best = std::max(best, std::abs(s));
    }
    maxima[static_cast<std::size_t>(r)] = best;
  }
  std::vector<Estimate> out;
  const double R = static_cast<double>(replicas);
  for (double level : x) {
    const auto hits = std::count_if(maxima.begin(), maxima.end(), [&](double b) { return b > level; });
    const double p = static_cast<double>(hits) / R;
    out.push_back({p, std::sqrt(p * (1.0 - p) / R), false});
  }
  return out;
}

CumulantCheck cumulant_check(const TriangularArrayModel& model, const SpeedSequence& a, double t, CumulantMode mode,
                             std::size_t samples, std::uint64_t seed) {
  CumulantCheck c;
  c.t = t;
  c.n_grid = model.n_grid();
  c.target = 0.5 * t * t;
  for (long long n : c.n_grid) {
    const double an = a(n);
    const double s = std::sqrt(model.total_variance(n));
    if (!(s > 0.0)) throw std::domain_error("zero total variance");
    const double theta = t / (std::sqrt(an) * s);
    const auto groups = model.row_laws(n);
    CompensatedSum sum;
    double var = 0.0;
    bool biased = false;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const EntryLaw& law = *groups[g].law;
      const double count = static_cast<double>(groups[g].count);
      if (mode == CumulantMode::analytic) {
        if (!law.has_mgf()) throw UnavailableError("cumulant_check: " + law.describe() + " has no closed-form mgf");
        const auto [lo, hi] = law.mgf_domain();
        if (!(theta > lo && theta < hi))
          throw std::domain_error("cumulant_check: mgf undefined at theta = " + std::to_string(theta));
        sum.add(count * law.log_mgf(theta));
      } else {
        if (!std::isfinite(law.sup_abs()))
          throw std::invalid_argument("cumulant_check: empirical mode needs bounded entries");
        Stream rng(derive_key(seed, {static_cast<std::uint64_t>(n), g}));
        std::vector<double> z(samples);
        for (double& x : z) x = theta * law.sample(rng);
        const double lm = log_sum_exp(z) - std::log(static_cast<double>(samples));
        CompensatedSum m2;
        for (double x : z) m2.add(std::exp(2.0 * (x - lm)));
        // Relative standard error of the sample mean of exp(theta X).
        const double rel2 = std::max(0.0, m2.value() / static_cast<double>(samples) - 1.0) / static_cast<double>(samples);
        sum.add(count * lm);
        var += count * count * rel2;
        biased = biased || rel2 > 0.0;
      }
    }
    c.values.push_back(an * sum.value());
    c.se.push_back(an * std::sqrt(var));
    c.bias_flag.push_back(biased);
  }
  return c;
}

}  // namespace mdplab
