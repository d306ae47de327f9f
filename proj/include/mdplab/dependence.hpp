#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mdplab/markov_chain.hpp"

namespace mdplab {

inline constexpr std::size_t kMaxAlphaStates = 20;

/// alpha(sigma(X_0), sigma(X_k)) by exhaustive enumeration of A; for each A
/// the optimal B is {y : P(X_0 in A, X_k = y) > P(A) pi_y}. With
/// `summed_future` the conservative sum over future coordinates
/// sum_{j >= k} alpha(j), capped at 1/4, is returned instead.
double alpha_exact(const FiniteMarkovChain& chain, int k, bool summed_future = false);
/// Single-threaded reference of alpha_exact (two-coordinate form).
double alpha_exact_serial(const FiniteMarkovChain& chain, int k);

/// sum_s pi_s W1(P^k(s, .), pi) with W1 the integrated absolute CDF gap.
double tau1_exact(const FiniteMarkovChain& chain, int k);

struct TauProfile {
  std::vector<int> lags;
  std::vector<double> tau1;
  std::vector<double> alpha;
  std::vector<double> tau_upper;  // 4 ||X_0||_inf alpha
  double rho_hat = 0.0;           // geometric fit of tau1 over the lags
  double fit_r2 = 0.0;
};

TauProfile tau_profile(const FiniteMarkovChain& chain, int max_lag);

/// 1-based inclusive index range.
struct IndexRange {
  long long first = 0;
  long long last = -1;
  [[nodiscard]] long long size() const { return last - first + 1; }
};

struct BlockScheme {
  long long n = 0;
  long long p = 0;
  long long q = 0;
  long long k = 0;
  double epsilon = 0.0;
  std::vector<IndexRange> big;    // I_j
  std::vector<IndexRange> small;  // J_j
  // Asymptotic constraints: eps -> 0, eps^2 n a^2 -> inf, eps^2 n a / log(n a) -> inf.
  double constraint_eps = 0.0;
  double constraint_growth = 0.0;
  double constraint_log = 0.0;
};

/// Default eps = (n a^2)^{-1/4}; p = floor(eps n a), q = floor(eps^2 n a),
/// k = floor(n / (p + q)). Throws std::invalid_argument when q < 1 or p + q > n.
BlockScheme plan_blocks(long long n, double a_n, std::optional<double> epsilon = std::nullopt);
/// Scheme with explicit block lengths; k defaults to floor(n / (p + q)).
BlockScheme make_scheme(long long n, long long p, long long q, std::optional<long long> k = std::nullopt);

struct BlockSums {
  std::vector<double> Y;
  std::vector<double> Z;
  std::vector<double> t_grid;
  std::vector<double> remainder;  // R_{n,t} at each grid t
};

/// R_{n,t} = sum_{i <= [nt]} X_i - sum_{j <= [kt]} (Y_j + Z_j).
BlockSums block_sums(std::span<const double> series, const BlockScheme& scheme,
                     std::span<const double> t_grid);

struct CouplingReport {
  long long replicas = 0;
  double mean_abs_diff = 0.0;  // E|Y_j - Y*_j| averaged over blocks
  double se_abs_diff = 0.0;
  double coupled_fraction = 0.0;  // share of blocks with Y_j == Y*_j
  double rho_hat = 0.0;
  double bound = 0.0;        // p * rho_hat^q
  double bound_exact = 0.0;  // p * tau1_exact(q)
  std::vector<double> pair_corr;  // corr(Y*_i, Y*_j), i < j, row-major
  double max_abs_corr = 0.0;
  double corr_threshold = 0.0;  // 3 / sqrt(replicas)
};

/// Stationary path with, at each big-block start, a maximal coupling between
/// the conditional law given the past and pi; both copies then share the
/// innovations of the block. Small blocks of the original path are filled by
/// a Markov bridge. Replicas run in parallel on streams derive_key(seed, {r}).
CouplingReport couple_blocks(const FiniteMarkovChain& chain, const BlockScheme& scheme,
                             long long replicas, std::uint64_t seed,
                             std::optional<double> rho_hat = std::nullopt);

struct VarianceGrowth {
  std::vector<long long> n;
  std::vector<double> var_over_n;  // Var(S_n) / n
  double sigma2 = 0.0;             // Var(X_0) + 2 sum_k Cov(X_0, X_k)
};

VarianceGrowth variance_growth(const FiniteMarkovChain& chain, std::span<const long long> n_grid);

/// Stationary sample path of length n.
std::vector<double> sample_chain(const FiniteMarkovChain& chain, long long n, std::uint64_t seed);

}  // namespace mdplab
