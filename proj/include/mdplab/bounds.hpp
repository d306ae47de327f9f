#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mdplab/array_models.hpp"
#include "mdplab/laws.hpp"
#include "mdplab/markov_chain.hpp"
#include "mdplab/speed.hpp"

namespace mdplab {

/// exp(-(t / 2B) asinh(B t / (2 s2))), clamped to 1.
double prokhorov_bound(double t, double B, double s2);

/// K exp(-C2 x / sqrt(m)) with C2 = sqrt(log(1/rho)) / (e sup_norm), clamped to 1.
double geo_tau_max_bound(double x, double m, double rho, double sup_norm, double K = 2.718281828459045);

double geo_tau_c2(double rho, double sup_norm);

struct BoundCurve {
  enum class Kind { prokhorov, geo_tau_max };
  Kind kind = Kind::prokhorov;
  double B = 1.0, s2 = 1.0;                                   // prokhorov
  double m = 1.0, rho = 0.5, sup_norm = 1.0, K = 2.718281828459045;  // geo_tau_max

  static BoundCurve prokhorov(double B, double s2);
  static BoundCurve geo_tau_max(double m, double rho, double sup_norm, double K);
  [[nodiscard]] double operator()(double t) const;
  /// "t,bound" rows.
  [[nodiscard]] std::string to_csv(std::span<const double> ts) const;
};

/// Smallest K with K exp(-C2 x / sqrt(m)) >= p(x) at every pilot point.
/// Calibration only; never applied implicitly.
double calibrate_geo_tau_K(std::span<const double> x, std::span<const double> p, double m, double rho,
                           double sup_norm);

/// P(max_{j <= m} |S_j| > x) for a stationary chain by simulation, one
/// estimate per x. Replicas run in parallel on streams derive_key(seed, {r}).
std::vector<Estimate> chain_max_tail(const FiniteMarkovChain& chain, long long m, std::span<const double> x,
                                     long long replicas, std::uint64_t seed);

enum class CumulantMode { analytic, empirical };

struct CumulantCheck {
  double t = 0.0;
  std::vector<long long> n_grid;
  std::vector<double> values;  // a_n sum_j log E exp(t X_nj / (sqrt(a_n) s_n))
  std::vector<double> se;      // empirical mode only
  std::vector<bool> bias_flag; // log of a sample mean is biased low
  double target = 0.0;         // t^2 / 2
};

/// Analytic mode needs every entry's cumulant generating function at
/// t / (sqrt(a_n) s_n); empirical mode needs bounded entries.
CumulantCheck cumulant_check(const TriangularArrayModel& model, const SpeedSequence& a, double t, CumulantMode mode,
                             std::size_t samples = 100000, std::uint64_t seed = 1);

}  // namespace mdplab
