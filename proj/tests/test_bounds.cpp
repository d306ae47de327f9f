#include <cmath>
#include <stdexcept>
#include <numbers>

#include "doctest.h"
#include "mdplab/bounds.hpp"
#include "mdplab/dependence.hpp"
#include "oracles.hpp"

using namespace mdplab;

TEST_SUITE("bounds") {
  TEST_CASE("prokhorov closed forms") {
    CHECK(prokhorov_bound(2.0, 1.0, 1.0) == doctest::Approx(1.0 / (1.0 + std::sqrt(2.0))).epsilon(1e-14));
    CHECK(prokhorov_bound(10.0, 1.0, 1.0) == doctest::Approx(std::exp(-5.0 * std::log(5.0 + std::sqrt(26.0)))).epsilon(1e-14));
    CHECK(prokhorov_bound(10.0, 1.0, 1.0) == doctest::Approx(9.52e-6).epsilon(1e-3));
    CHECK(prokhorov_bound(1e-9, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(prokhorov_bound(0.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(prokhorov_bound(1.0, -1.0, 1.0), std::invalid_argument);
  }

  TEST_CASE("geometric tau maximal bound") {
    const double e = std::numbers::e;
    CHECK(geo_tau_max_bound(2.0 * e, 4.0, std::exp(-1.0), 1.0, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(geo_tau_max_bound(0.0, 4.0, 0.5, 1.0, 0.3) == doctest::Approx(0.3));
    CHECK(geo_tau_max_bound(0.0, 4.0, 0.5, 1.0, 3.0) == 1.0);
    CHECK(geo_tau_max_bound(5.0, 4.0, 1.0 - 1e-12, 1.0, 0.5) == doctest::Approx(0.5).epsilon(1e-5));
    CHECK_THROWS_AS(geo_tau_max_bound(1.0, 4.0, 1.0, 1.0), std::invalid_argument);
  }

  TEST_CASE("bound curves write t,bound rows") {
    const auto c = BoundCurve::prokhorov(1.0, 1.0);
    const std::vector<double> t{2.0};
    const std::string csv = c.to_csv(t);
    CHECK(csv.rfind("t,bound\n2,", 0) == 0);
    CHECK(c(0.0) == 1.0);
  }

  TEST_CASE("cumulant check: Rademacher closed form") {
    const auto m = build_model(oracle::iid(oracle::rademacher(), oracle::power_speed(1.0, 100.0), {1000}));
    const CumulantCheck c = cumulant_check(m, m.speed(), 1.0, CumulantMode::analytic);
    CHECK(c.values[0] == doctest::Approx(100.0 * std::log(std::cosh(0.1))).epsilon(1e-12));
    CHECK(std::abs(c.values[0] - 0.499168) <= 1e-6);
    CHECK(c.target == 0.5);
  }

  TEST_CASE("cumulant check: t = 0 and Gaussian") {
    const auto r = build_model(oracle::iid(oracle::rademacher(), oracle::power_speed(0.5), {10, 100}));
    for (double v : cumulant_check(r, r.speed(), 0.0, CumulantMode::analytic).values) CHECK(v == 0.0);
    const auto g = build_model(oracle::iid(oracle::gaussian(), oracle::power_speed(0.5), {10, 100, 1000}));
    for (double v : cumulant_check(g, g.speed(), 1.7, CumulantMode::analytic).values)
      CHECK(v == doctest::Approx(0.5 * 1.7 * 1.7).epsilon(1e-12));
  }

  TEST_CASE("property: Rademacher cumulants approach t^2/2 monotonically") {
    const auto m = build_model(oracle::iid(oracle::rademacher(), oracle::power_speed(0.5), {100, 1000, 10000, 100000}));
    const auto c = cumulant_check(m, m.speed(), 1.0, CumulantMode::analytic);
    for (std::size_t i = 1; i < c.values.size(); ++i)
      CHECK(std::abs(c.values[i] - 0.5) < std::abs(c.values[i - 1] - 0.5));
  }

  TEST_CASE("cumulant check: empirical mode agrees with analytic") {
    const auto m = build_model(oracle::iid(oracle::rademacher(), oracle::power_speed(0.5), {100}));
    const auto a = cumulant_check(m, m.speed(), 1.0, CumulantMode::analytic);
    const auto e = cumulant_check(m, m.speed(), 1.0, CumulantMode::empirical, 200000, 3);
    CHECK(std::abs(e.values[0] - a.values[0]) <= 4.0 * e.se[0]);
    const auto g = build_model(oracle::iid(oracle::gaussian(), oracle::power_speed(0.5), {100}));
    CHECK_THROWS_AS(cumulant_check(g, g.speed(), 1.0, CumulantMode::empirical), std::invalid_argument);
  }

  TEST_CASE("chain maximal tail stays under the calibrated bound") {
    const auto c = FiniteMarkovChain::two_state(0.9);
    const double rho = tau_profile(c, 10).rho_hat;
    const long long m = 100;
    const std::vector<double> x{10, 20, 30, 40, 50, 60};
    const auto pilot = chain_max_tail(c, m, x, 4000, 1);
    std::vector<double> p;
    for (const auto& e : pilot) p.push_back(e.value);
    const double K = calibrate_geo_tau_K(x, p, static_cast<double>(m), rho, c.sup_norm());
    const auto fresh = chain_max_tail(c, m, x, 4000, 2);
    for (std::size_t i = 0; i < x.size(); ++i)
      CHECK(fresh[i].value <= geo_tau_max_bound(x[i], static_cast<double>(m), rho, c.sup_norm(), K) + 3.0 * fresh[i].se);
  }
}
