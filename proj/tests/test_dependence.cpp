#include <cmath>
#include <stdexcept>
#include <numeric>

#include "doctest.h"
#include "mdplab/dependence.hpp"

using namespace mdplab;

namespace {

FiniteMarkovChain three_state() {
  return FiniteMarkovChain::centered({-1.0, 0.5, 2.0}, {{0.6, 0.3, 0.1}, {0.2, 0.5, 0.3}, {0.3, 0.3, 0.4}});
}

double cov_lag(const FiniteMarkovChain& c, int k) {
  const auto P = c.power(k);
  const auto pi = c.stationary();
  const auto v = c.values();
  double s = 0.0;
  for (std::size_t x = 0; x < c.size(); ++x)
    for (std::size_t y = 0; y < c.size(); ++y) s += pi[x] * v[x] * P[x][y] * v[y];
  return s;
}

}  // namespace

TEST_SUITE("dependence") {
  TEST_CASE("alpha and tau for the two-state chain") {
    const auto c = FiniteMarkovChain::two_state(0.9);
    CHECK(alpha_exact(c, 1) == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(alpha_exact(c, 2) == doctest::Approx(0.16).epsilon(1e-14));
    CHECK(tau1_exact(c, 1) == doctest::Approx(0.8).epsilon(1e-14));
    for (int k = 1; k <= 20; ++k) {
      const double lam = std::pow(0.8, k);
      CHECK(std::abs(alpha_exact(c, k) - 0.25 * lam) <= 1e-12);
      CHECK(std::abs(tau1_exact(c, k) - lam) <= 1e-12);
      CHECK(std::abs(tau1_exact(c, k) - 4.0 * c.sup_norm() * alpha_exact(c, k)) <= 1e-12);
    }
  }

  TEST_CASE("independent chain has zero coefficients") {
    const auto c = FiniteMarkovChain::two_state(0.5);
    CHECK(alpha_exact(c, 1) == doctest::Approx(0.0));
    CHECK(tau1_exact(c, 1) == doctest::Approx(0.0));
    const VarianceGrowth vg = variance_growth(c, std::vector<long long>{10});
    CHECK(vg.sigma2 == doctest::Approx(c.variance()).epsilon(1e-12));
  }

  TEST_CASE("parallel and serial alpha agree") {
    const auto c = FiniteMarkovChain::moving_window(3);
    for (int k = 1; k <= 4; ++k) CHECK(alpha_exact(c, k) == doctest::Approx(alpha_exact_serial(c, k)).epsilon(1e-14));
    const auto t = three_state();
    for (int k = 1; k <= 5; ++k) CHECK(alpha_exact(t, k) == doctest::Approx(alpha_exact_serial(t, k)).epsilon(1e-14));
  }

  TEST_CASE("summed-future alpha dominates the two-coordinate one") {
    const auto c = FiniteMarkovChain::two_state(0.9);
    CHECK(alpha_exact(c, 3, true) >= alpha_exact(c, 3));
    CHECK(alpha_exact(c, 3, true) <= 0.25);
  }

  TEST_CASE("property: tau <= 4 |X|_inf alpha and |Cov| <= |X|_inf tau") {
    for (const auto& c : {three_state(), FiniteMarkovChain::moving_window(2), FiniteMarkovChain::two_state(0.7)}) {
      for (int k = 1; k <= 6; ++k) {
        const double tau = tau1_exact(c, k);
        CHECK(tau <= 4.0 * c.sup_norm() * alpha_exact(c, k) + 1e-12);
        CHECK(std::abs(cov_lag(c, k)) <= c.sup_norm() * tau + 1e-12);
      }
    }
  }

  TEST_CASE("moving-window chain is m-dependent") {
    const auto c = FiniteMarkovChain::moving_window(3);
    CHECK(alpha_exact(c, 3) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(alpha_exact(c, 2) > 0.0);
  }

  TEST_CASE("tau profile fits rho = 0.8") {
    const auto p = tau_profile(FiniteMarkovChain::two_state(0.9), 10);
    CHECK(p.rho_hat == doctest::Approx(0.8).epsilon(1e-10));
    CHECK(p.fit_r2 == doctest::Approx(1.0).epsilon(1e-10));
  }

  TEST_CASE("variance growth of the two-state chain") {
    const auto c = FiniteMarkovChain::two_state(0.9);
    const std::vector<long long> grid{10, 100, 1000};
    const VarianceGrowth vg = variance_growth(c, grid);
    CHECK(std::abs(vg.sigma2 - 9.0) <= 1e-9);
    // Var(S_n)/n = 9 - 2 * 0.8 (1 - 0.8^n) / (0.2^2 n)
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double n = static_cast<double>(grid[i]);
      CHECK(vg.var_over_n[i] == doctest::Approx(9.0 - 1.6 * (1.0 - std::pow(0.8, n)) / (0.04 * n)).epsilon(1e-10));
    }
    CHECK(std::abs(vg.var_over_n[2] - 8.96) <= 0.01);
  }

  TEST_CASE("plan_blocks arithmetic") {
    const BlockScheme a = plan_blocks(1000000, std::pow(1e6, -0.4));
    CHECK(a.epsilon == doctest::Approx(0.50119).epsilon(1e-4));
    CHECK(a.p == 1995);
    CHECK(a.q == 1000);
    CHECK(a.k == 333);
    const BlockScheme b = plan_blocks(10000, 0.05);
    CHECK(b.epsilon == doctest::Approx(0.44721).epsilon(1e-4));
    CHECK(b.p == 223);
    CHECK(b.q == 100);
    CHECK(b.k == 30);
    CHECK_THROWS_AS(plan_blocks(100, 0.001), std::invalid_argument);
    CHECK_THROWS_AS(plan_blocks(100, 0.1, 2.0), std::invalid_argument);
  }

  TEST_CASE("property: block constraints move the right way along the grid") {
    for (double gamma : {0.1, 0.25, 0.4}) {
      double eps = INFINITY, growth = 0.0, logc = 0.0;
      for (long long n : {10000LL, 100000LL, 1000000LL, 10000000LL}) {
        const BlockScheme s = plan_blocks(n, std::pow(static_cast<double>(n), -gamma));
        CHECK(s.constraint_eps < eps);
        CHECK(s.constraint_growth > growth);
        CHECK(s.constraint_log > logc);
        eps = s.constraint_eps;
        growth = s.constraint_growth;
        logc = s.constraint_log;
      }
    }
  }

  TEST_CASE("block sums by hand") {
    std::vector<double> x(10);
    std::iota(x.begin(), x.end(), 1.0);
    const BlockScheme s = make_scheme(10, 2, 1, 3);
    const std::vector<double> t{1.0, 0.5};
    const BlockSums b = block_sums(x, s, t);
    CHECK(b.Y == std::vector<double>{3, 9, 15});
    CHECK(b.Z == std::vector<double>{3, 6, 9});
    CHECK(b.remainder[0] == doctest::Approx(10.0));
    CHECK(b.remainder[1] == doctest::Approx(9.0));
    const std::vector<double> zero(10, 0.0);
    const BlockSums z = block_sums(zero, s, t);
    for (double r : z.remainder) CHECK(r == 0.0);
    CHECK_THROWS_AS(block_sums(std::vector<double>(9, 1.0), s, t), std::invalid_argument);
  }

  TEST_CASE("property: decomposition identity on random series") {
    const auto c = FiniteMarkovChain::two_state(0.9);
    for (long long n : {997LL, 5000LL}) {
      const auto x = sample_chain(c, n, 7);
      const BlockScheme s = make_scheme(n, 37, 11);
      const std::vector<double> t{0.1, 0.33, 0.5, 0.9, 1.0};
      const BlockSums b = block_sums(x, s, t);
      for (std::size_t g = 0; g < t.size(); ++g) {
        const auto nt = static_cast<std::size_t>(std::floor(static_cast<double>(n) * t[g]));
        const auto kt = static_cast<std::size_t>(std::floor(static_cast<double>(s.k) * t[g]));
        double direct = 0.0, blocks = 0.0;
        for (std::size_t i = 0; i < nt; ++i) direct += x[i];
        for (std::size_t j = 0; j < kt; ++j) blocks += b.Y[j] + b.Z[j];
        CHECK(std::abs(direct - blocks - b.remainder[g]) <= 1e-9 * static_cast<double>(n) * c.sup_norm());
      }
    }
  }

  TEST_CASE("coupling: m-dependent blocks are uncorrelated") {
    const auto c = FiniteMarkovChain::moving_window(2);
    const BlockScheme s = make_scheme(60, 8, 3);
    const CouplingReport r = couple_blocks(c, s, 4000, 11);
    CHECK(r.max_abs_corr <= r.corr_threshold);
    CHECK(r.corr_threshold == doctest::Approx(3.0 / std::sqrt(4000.0)));
  }

  TEST_CASE("coupling bound p rho^q") {
    const auto c = FiniteMarkovChain::two_state(0.9);
    const BlockScheme s = make_scheme(600, 100, 50);
    const CouplingReport r = couple_blocks(c, s, 200, 3, 0.8);
    CHECK(r.bound == doctest::Approx(100.0 * std::pow(0.8, 50)).epsilon(1e-12));
    CHECK(r.bound == doctest::Approx(1.427e-3).epsilon(1e-3));
    CHECK(r.mean_abs_diff >= 0.0);
    CHECK_THROWS_AS(couple_blocks(c, make_scheme(600, 100, 0), 200, 3), std::invalid_argument);
  }

  TEST_CASE("coupling is deterministic for a seed") {
    const auto c = FiniteMarkovChain::two_state(0.9);
    const BlockScheme s = make_scheme(200, 20, 5);
    const CouplingReport a = couple_blocks(c, s, 300, 5);
    const CouplingReport b = couple_blocks(c, s, 300, 5);
    CHECK(a.mean_abs_diff == b.mean_abs_diff);
    CHECK(a.pair_corr == b.pair_corr);
  }
}
