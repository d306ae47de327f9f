#include "mdplab/dependence.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "mdplab/numeric.hpp"
#include "mdplab/rng.hpp"

namespace mdplab {

namespace {

void check_alpha_size(const FiniteMarkovChain& chain) {
  if (chain.size() > kMaxAlphaStates)
    throw std::invalid_argument("alpha: state space too large (" + std::to_string(chain.size()) +
                                " > " + std::to_string(kMaxAlphaStates) + ")");
}

void check_lag(int k) {
  if (k < 1) throw std::invalid_argument("lag must be >= 1");
}

// M[x][y] = pi_x (P^k(x, y) - pi_y), so that for a set A the vector
// d_y = sum_{x in A} M[x][y] equals P(X_0 in A, X_k = y) - P(A) pi_y.
std::vector<std::vector<double>> joint_excess(const FiniteMarkovChain& chain, int k) {
  const auto pk = chain.power(k);
  const auto pi = chain.stationary();
  const std::size_t S = chain.size();
  std::vector<std::vector<double>> m(S, std::vector<double>(S));
  for (std::size_t x = 0; x < S; ++x)
    for (std::size_t y = 0; y < S; ++y) m[x][y] = pi[x] * (pk[x][y] - pi[y]);
  return m;
}

double positive_part_sum(const std::vector<double>& d) {
  double s = 0.0;
  for (double v : d) s += std::max(v, 0.0);
  return s;
}

double alpha_two_coordinate(const FiniteMarkovChain& chain, int k) {
  const auto m = joint_excess(chain, k);
  const std::size_t S = chain.size();
  const std::uint64_t total = std::uint64_t{1} << S;
  const std::uint64_t chunk = std::max<std::uint64_t>(1, total / 64);
  const auto chunks = static_cast<long long>((total + chunk - 1) / chunk);
  double best = 0.0;

#pragma omp parallel for reduction(max : best) schedule(dynamic)
  for (long long c = 0; c < chunks; ++c) {
    const std::uint64_t begin = static_cast<std::uint64_t>(c) * chunk;
    const std::uint64_t end = std::min(total, begin + chunk);
    std::uint64_t gray = begin ^ (begin >> 1);
    std::vector<double> d(S, 0.0);
    for (std::size_t x = 0; x < S; ++x)
      if (gray >> x & 1U)
        for (std::size_t y = 0; y < S; ++y) d[y] += m[x][y];
    double local = positive_part_sum(d);
    for (std::uint64_t i = begin + 1; i < end; ++i) {
      const auto bit = static_cast<std::size_t>(std::countr_zero(i));
      const double sign = (gray >> bit & 1U) ? -1.0 : 1.0;
      gray ^= std::uint64_t{1} << bit;
      for (std::size_t y = 0; y < S; ++y) d[y] += sign * m[bit][y];
      local = std::max(local, positive_part_sum(d));
    }
    best = std::max(best, local);
  }
  return best;
}

}  // namespace

double alpha_exact(const FiniteMarkovChain& chain, int k, bool summed_future) {
  check_alpha_size(chain);
  check_lag(k);
  if (!summed_future) return alpha_two_coordinate(chain, k);
  CompensatedSum sum;
  for (int j = k; j < k + 10000; ++j) {
    const double a = alpha_two_coordinate(chain, j);
    sum.add(a);
    if (sum.value() >= 0.25) return 0.25;
    if (a <= 1e-17 * std::max(sum.value(), 1e-300)) break;
  }
  return std::min(0.25, sum.value());
}

double alpha_exact_serial(const FiniteMarkovChain& chain, int k) {
  check_alpha_size(chain);
  check_lag(k);
  const auto pk = chain.power(k);
  const auto pi = chain.stationary();
  const std::size_t S = chain.size();
  double best = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << S); ++mask) {
    double pa = 0.0;
    for (std::size_t x = 0; x < S; ++x)
      if (mask >> x & 1U) pa += pi[x];
    double value = 0.0;
    for (std::size_t y = 0; y < S; ++y) {
      double joint = 0.0;
      for (std::size_t x = 0; x < S; ++x)
        if (mask >> x & 1U) joint += pi[x] * pk[x][y];
      value += std::max(0.0, joint - pa * pi[y]);
    }
    best = std::max(best, value);
  }
  return best;
}

double tau1_exact(const FiniteMarkovChain& chain, int k) {
  check_alpha_size(chain);
  check_lag(k);
  const auto pk = chain.power(k);
  const auto pi = chain.stationary();
  const auto v = chain.values();
  const std::size_t S = chain.size();

  std::vector<double> support(v.begin(), v.end());
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());
  const std::size_t L = support.size();
  auto slot = [&](double x) {
    return static_cast<std::size_t>(std::lower_bound(support.begin(), support.end(), x) - support.begin());
  };

  std::vector<double> marginal(L, 0.0);
  for (std::size_t s = 0; s < S; ++s) marginal[slot(v[s])] += pi[s];

  double tau = 0.0;
  for (std::size_t s = 0; s < S; ++s) {
    std::vector<double> cond(L, 0.0);
    for (std::size_t y = 0; y < S; ++y) cond[slot(v[y])] += pk[s][y];
    double fc = 0.0, fm = 0.0, w1 = 0.0;
    for (std::size_t i = 0; i + 1 < L; ++i) {
      fc += cond[i];
      fm += marginal[i];
      w1 += std::abs(fc - fm) * (support[i + 1] - support[i]);
    }
    tau += pi[s] * w1;
  }
  return tau;
}

TauProfile tau_profile(const FiniteMarkovChain& chain, int max_lag) {
  check_lag(max_lag);
  TauProfile prof;
  const double sup = chain.sup_norm();
  std::vector<double> xs, ys;
  for (int k = 1; k <= max_lag; ++k) {
    prof.lags.push_back(k);
    const double t = tau1_exact(chain, k);
    const double a = alpha_exact(chain, k);
    prof.tau1.push_back(t);
    prof.alpha.push_back(a);
    prof.tau_upper.push_back(4.0 * sup * a);
    if (t > 1e-15) {
      xs.push_back(k);
      ys.push_back(std::log(t));
    }
  }
  if (xs.size() >= 2) {
    const LinearFit fit = fit_line(xs, ys);
    prof.rho_hat = std::exp(fit.slope);
    prof.fit_r2 = fit.r2;
  } else if (xs.size() == 1) {
    prof.rho_hat = std::exp(ys[0] / xs[0]);
    prof.fit_r2 = 1.0;
  }
  return prof;
}

BlockScheme make_scheme(long long n, long long p, long long q, std::optional<long long> k) {
  if (n < 1) throw std::invalid_argument("blocks: n must be >= 1");
  if (p < 1) throw std::invalid_argument("blocks: big-block length p < 1");
  if (q < 0) throw std::invalid_argument("blocks: small-block length q < 0");
  if (p + q > n) throw std::invalid_argument("blocks: p + q > n");
  BlockScheme s;
  s.n = n;
  s.p = p;
  s.q = q;
  s.k = k.value_or(n / (p + q));
  if (s.k < 1 || s.k * (p + q) > n)
    throw std::invalid_argument("blocks: block count does not fit in 1..n");
  for (long long j = 0; j < s.k; ++j) {
    const long long start = j * (p + q) + 1;
    s.big.push_back({start, start + p - 1});
    s.small.push_back({start + p, start + p + q - 1});
  }
  return s;
}

BlockScheme plan_blocks(long long n, double a_n, std::optional<double> epsilon) {
  if (n < 1) throw std::invalid_argument("blocks: n must be >= 1");
  if (!(a_n > 0.0)) throw std::invalid_argument("blocks: a_n must be positive");
  const double na = static_cast<double>(n) * a_n;
  double eps = 0.0;
  if (epsilon) {
    if (!(*epsilon > 0.0 && *epsilon <= 1.0))
      throw std::invalid_argument("blocks: epsilon must lie in (0, 1]");
    eps = *epsilon;
  } else {
    eps = std::min(1.0, std::pow(na * a_n, -0.25));
  }
  const long long p = robust_floor(eps * na);
  const long long q = robust_floor(eps * eps * na);
  if (q < 1) throw std::invalid_argument("blocks: small-block length q < 1");
  if (p + q > n) throw std::invalid_argument("blocks: p + q > n");
  BlockScheme s = make_scheme(n, p, q);
  s.epsilon = eps;
  s.constraint_eps = eps;
  s.constraint_growth = eps * eps * na * a_n;
  s.constraint_log = na > 1.0 ? eps * eps * na / std::log(na) : kInf;
  return s;
}

BlockSums block_sums(std::span<const double> series, const BlockScheme& scheme,
                     std::span<const double> t_grid) {
  if (static_cast<long long>(series.size()) != scheme.n)
    throw std::invalid_argument("block_sums: series length " + std::to_string(series.size()) +
                                " does not match n = " + std::to_string(scheme.n));
  std::vector<double> prefix(series.size() + 1, 0.0);
  CompensatedSum running;
  for (std::size_t i = 0; i < series.size(); ++i) {
    running.add(series[i]);
    prefix[i + 1] = running.value();
  }
  auto range_sum = [&](const IndexRange& r) {
    CompensatedSum s;
    for (long long i = r.first; i <= r.last; ++i) s.add(series[static_cast<std::size_t>(i - 1)]);
    return s.value();
  };

  BlockSums out;
  for (long long j = 0; j < scheme.k; ++j) {
    out.Y.push_back(range_sum(scheme.big[static_cast<std::size_t>(j)]));
    out.Z.push_back(range_sum(scheme.small[static_cast<std::size_t>(j)]));
  }
  for (double t : t_grid) {
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("block_sums: t must lie in [0, 1]");
    const long long nt = robust_floor(static_cast<double>(scheme.n) * t);
    const long long kt = robust_floor(static_cast<double>(scheme.k) * t);
    CompensatedSum blocks;
    for (long long j = 0; j < kt; ++j) {
      blocks.add(out.Y[static_cast<std::size_t>(j)]);
      blocks.add(out.Z[static_cast<std::size_t>(j)]);
    }
    out.t_grid.push_back(t);
    out.remainder.push_back(prefix[static_cast<std::size_t>(nt)] - blocks.value());
  }
  return out;
}

std::vector<double> sample_chain(const FiniteMarkovChain& chain, long long n, std::uint64_t seed) {
  Stream rng(seed);
  std::vector<double> path(static_cast<std::size_t>(n));
  std::size_t state = chain.draw_stationary(rng);
  const auto v = chain.values();
  for (long long i = 0; i < n; ++i) {
    if (i > 0) state = chain.step(state, uniform01(rng));
    path[static_cast<std::size_t>(i)] = v[state];
  }
  return path;
}

namespace {

// Draws X* given X = x under the maximal coupling of mu (law of X) and nu.
std::size_t coupled_partner(std::size_t x, const std::vector<double>& mu, std::span<const double> nu,
                            Stream& rng) {
  const double keep = std::min(mu[x], nu[x]) / mu[x];
  const double u = uniform01(rng);
  const double w = uniform01(rng);
  if (u < keep) return x;
  double mass = 0.0;
  for (std::size_t y = 0; y < mu.size(); ++y) mass += std::max(0.0, nu[y] - mu[y]);
  double acc = 0.0;
  std::size_t last = x;
  for (std::size_t y = 0; y < mu.size(); ++y) {
    const double excess = std::max(0.0, nu[y] - mu[y]);
    if (excess <= 0.0) continue;
    last = y;
    acc += excess;
    if (w * mass < acc) return y;
  }
  return last;
}

}  // namespace

CouplingReport couple_blocks(const FiniteMarkovChain& chain, const BlockScheme& scheme,
                             long long replicas, std::uint64_t seed, std::optional<double> rho_hat) {
  if (scheme.q < 1) throw std::invalid_argument("couple_blocks: q = 0 gives a vacuous coupling bound");
  if (replicas < 2) throw std::invalid_argument("couple_blocks: need at least two replicas");
  const std::size_t S = chain.size();
  const long long k = scheme.k;
  const auto v = chain.values();
  const auto pi = chain.stationary();
  const auto gap = chain.power(static_cast<int>(scheme.q + 1));
  const long long horizon = scheme.big.back().last;

  std::vector<double> ystar(static_cast<std::size_t>(replicas * k));
  std::vector<double> absdiff(static_cast<std::size_t>(replicas));
  std::vector<long long> coupled(static_cast<std::size_t>(replicas));

#pragma omp parallel for schedule(static)
  for (long long r = 0; r < replicas; ++r) {
    Stream rng(derive_key(seed, {static_cast<std::uint64_t>(r)}));
    std::size_t x = chain.draw_stationary(rng);
    std::size_t xs = x;
    std::size_t prev_end = x;
    long long block = 0;
    double y = 0.0, ys = 0.0, diff = 0.0;
    long long same = 0;
    for (long long i = 1; i <= horizon; ++i) {
      if (i > 1) {
        const double u = uniform01(rng);
        x = chain.step(x, u);
        xs = chain.step(xs, u);
      }
      const IndexRange& big = scheme.big[static_cast<std::size_t>(block)];
      if (i == big.first) {
        if (block > 0) xs = coupled_partner(x, gap[prev_end], pi, rng);
        else xs = x;
        y = 0.0;
        ys = 0.0;
      }
      if (i >= big.first && i <= big.last) {
        y += v[x];
        ys += v[xs];
      }
      if (i == big.last) {
        ystar[static_cast<std::size_t>(r * k + block)] = ys;
        diff += std::abs(y - ys);
        if (y == ys) ++same;
        prev_end = x;
        ++block;
      }
    }
    absdiff[static_cast<std::size_t>(r)] = diff / static_cast<double>(k);
    coupled[static_cast<std::size_t>(r)] = same;
  }

  CouplingReport rep;
  rep.replicas = replicas;
  const double R = static_cast<double>(replicas);
  CompensatedSum d1, d2;
  long long same_total = 0;
  for (long long r = 0; r < replicas; ++r) {
    d1.add(absdiff[static_cast<std::size_t>(r)]);
    d2.add(absdiff[static_cast<std::size_t>(r)] * absdiff[static_cast<std::size_t>(r)]);
    same_total += coupled[static_cast<std::size_t>(r)];
  }
  rep.mean_abs_diff = d1.value() / R;
  rep.se_abs_diff =
      std::sqrt(std::max(0.0, d2.value() / R - rep.mean_abs_diff * rep.mean_abs_diff) / (R - 1.0));
  rep.coupled_fraction = static_cast<double>(same_total) / (R * static_cast<double>(k));

  std::vector<double> mean(static_cast<std::size_t>(k), 0.0), sd(static_cast<std::size_t>(k), 0.0);
  for (long long j = 0; j < k; ++j) {
    CompensatedSum s;
    for (long long r = 0; r < replicas; ++r) s.add(ystar[static_cast<std::size_t>(r * k + j)]);
    mean[static_cast<std::size_t>(j)] = s.value() / R;
    CompensatedSum ss;
    for (long long r = 0; r < replicas; ++r) {
      const double c = ystar[static_cast<std::size_t>(r * k + j)] - mean[static_cast<std::size_t>(j)];
      ss.add(c * c);
    }
    sd[static_cast<std::size_t>(j)] = std::sqrt(ss.value());
  }
  for (long long i = 0; i < k; ++i)
    for (long long j = i + 1; j < k; ++j) {
      CompensatedSum cross;
      for (long long r = 0; r < replicas; ++r)
        cross.add((ystar[static_cast<std::size_t>(r * k + i)] - mean[static_cast<std::size_t>(i)]) *
                  (ystar[static_cast<std::size_t>(r * k + j)] - mean[static_cast<std::size_t>(j)]));
      const double denom = sd[static_cast<std::size_t>(i)] * sd[static_cast<std::size_t>(j)];
      const double c = denom > 0.0 ? cross.value() / denom : 0.0;
      rep.pair_corr.push_back(c);
      rep.max_abs_corr = std::max(rep.max_abs_corr, std::abs(c));
    }
  rep.corr_threshold = 3.0 / std::sqrt(R);

  rep.rho_hat = rho_hat ? *rho_hat : tau_profile(chain, 20).rho_hat;
  rep.bound = static_cast<double>(scheme.p) * std::pow(rep.rho_hat, static_cast<double>(scheme.q));
  rep.bound_exact =
      S <= kMaxAlphaStates ? static_cast<double>(scheme.p) * tau1_exact(chain, static_cast<int>(scheme.q)) : kNaN;
  return rep;
}

VarianceGrowth variance_growth(const FiniteMarkovChain& chain, std::span<const long long> n_grid) {
  const std::size_t S = chain.size();
  const auto pi = chain.stationary();
  const auto v = chain.values();
  const auto& P = chain.transition();

  VarianceGrowth out;
  long long max_n = 1;
  for (long long n : n_grid) {
    if (n < 1) throw std::invalid_argument("variance_growth: n must be >= 1");
    max_n = std::max(max_n, n);
  }
  // gamma_k = Cov(X_0, X_k) = sum_s pi_s v_s (P^k v)_s.
  std::vector<double> gamma(static_cast<std::size_t>(max_n), 0.0);
  std::vector<double> w(v.begin(), v.end()), next(S);
  for (long long k = 0; k < max_n; ++k) {
    if (k > 0) {
      for (std::size_t s = 0; s < S; ++s) {
        double acc = 0.0;
        for (std::size_t y = 0; y < S; ++y) acc += P[s][y] * w[y];
        next[s] = acc;
      }
      w.swap(next);
    }
    double g = 0.0;
    for (std::size_t s = 0; s < S; ++s) g += pi[s] * v[s] * w[s];
    gamma[static_cast<std::size_t>(k)] = g;
  }
  for (long long n : n_grid) {
    CompensatedSum s;
    s.add(gamma[0]);
    const double nd = static_cast<double>(n);
    for (long long k = 1; k < n; ++k)
      s.add(2.0 * (1.0 - static_cast<double>(k) / nd) * gamma[static_cast<std::size_t>(k)]);
    out.n.push_back(n);
    out.var_over_n.push_back(s.value());
  }

  // sigma^2 = 2 <v, Z v>_pi - <v, v>_pi with Z = (I - P + 1 pi)^{-1}.
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(S), static_cast<Eigen::Index>(S));
  for (std::size_t i = 0; i < S; ++i)
    for (std::size_t j = 0; j < S; ++j)
      A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += pi[j] - P[i][j];
  Eigen::VectorXd vv(static_cast<Eigen::Index>(S));
  for (std::size_t i = 0; i < S; ++i) vv(static_cast<Eigen::Index>(i)) = v[i];
  const Eigen::VectorXd zv = A.partialPivLu().solve(vv);
  double quad = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < S; ++i) {
    quad += pi[i] * v[i] * zv(static_cast<Eigen::Index>(i));
    norm += pi[i] * v[i] * v[i];
  }
  out.sigma2 = 2.0 * quad - norm;
  return out;
}

}  // namespace mdplab
