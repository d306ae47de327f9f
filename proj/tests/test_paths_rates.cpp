#include <cmath>
#include <stdexcept>
#include <limits>

#include "doctest.h"
#include "mdplab/paths_rates.hpp"

using namespace mdplab;

namespace {

PiecewisePath linear(std::vector<double> knots, std::vector<double> values) {
  PiecewisePath p;
  p.kind = PiecewisePath::Kind::linear;
  p.knots = std::move(knots);
  p.values = std::move(values);
  p.validate();
  return p;
}

}  // namespace

TEST_SUITE("paths_rates") {
  TEST_CASE("donsker step path on quarters") {
    const std::vector<double> row{0.5, -0.5, 0.5, 0.5};
    const std::vector<double> partials{0.25, 0.5, 0.75, 1.0};
    const PiecewisePath w = donsker_path(row, partials);
    CHECK(w.kind == PiecewisePath::Kind::step);
    CHECK(w(0.1) == 0.0);
    CHECK(w(0.3) == doctest::Approx(0.5));
    CHECK(w(0.6) == doctest::Approx(0.0));
    CHECK(w(0.8) == doctest::Approx(0.5));
    CHECK(w(1.0) == doctest::Approx(1.0));
    CHECK(rate_I(w) == std::numeric_limits<double>::infinity());
  }

  TEST_CASE("donsker linear path interpolates the partial sums") {
    const std::vector<double> row{0.5, -0.5, 0.5, 0.5};
    const std::vector<double> partials{0.25, 0.5, 0.75, 1.0};
    const PiecewisePath w = donsker_path(row, partials, PiecewisePath::Kind::linear);
    const double S[] = {0.0, 0.5, 0.0, 0.5, 1.0};
    for (int i = 0; i <= 4; ++i) CHECK(w(i / 4.0) == doctest::Approx(S[i]));
    CHECK(w(0.125) == doctest::Approx(0.25));
    CHECK(std::isfinite(rate_I(w)));
  }

  TEST_CASE("zero row gives the zero path") {
    const std::vector<double> row(4, 0.0);
    const std::vector<double> partials{0.25, 0.5, 0.75, 1.0};
    const PiecewisePath w = donsker_path(row, partials);
    CHECK(w.sup() == 0.0);
    CHECK(rate_I(w) == 0.0);
  }

  TEST_CASE("rate_I closed forms") {
    CHECK(rate_I(linear({0, 1}, {0, 1})) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(rate_I(linear({0, 0.5, 1}, {0, 1, 1})) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(rate_I(linear({0, 1}, {0, 0})) == 0.0);
  }

  TEST_CASE("property: rate_I(c z) = c^2 rate_I(z)") {
    const PiecewisePath z = linear({0, 0.2, 0.7, 1}, {0, 0.3, -0.4, 1.1});
    for (double c : {-3.0, -0.5, 0.1, 2.0, 7.5}) {
      PiecewisePath cz = z;
      for (double& v : cz.values) v *= c;
      CHECK(std::abs(rate_I(cz) - c * c * rate_I(z)) <= 1e-12 * std::max(1.0, c * c * rate_I(z)));
    }
  }

  TEST_CASE("step paths with a nonzero jump have infinite rate") {
    PiecewisePath p;
    p.kind = PiecewisePath::Kind::step;
    p.knots = {0, 0.5, 1};
    p.values = {0, 0.2, 0.2};
    CHECK(rate_I(p) == std::numeric_limits<double>::infinity());
  }

  TEST_CASE("rate_Im levels and increments") {
    CHECK(rate_Im({{0.5, 1.0}, {1.0, 1.0}}, RateForm::levels) == doctest::Approx(1.0));
    CHECK(rate_Im({{1.0}, {1.0}}, RateForm::increments) == doctest::Approx(0.5));
    CHECK(rate_Im({{1.0}, {2.0}}, RateForm::increments) == doctest::Approx(2.0));
    CHECK(rate_Im({{0.3, 0.6, 1.0}, {0.0, 0.0, 0.0}}, RateForm::levels) == 0.0);
    // Increments are differences of levels.
    CHECK(rate_Im({{0.25, 1.0}, {0.5, -0.25}}, RateForm::increments) ==
          doctest::Approx(rate_Im({{0.25, 1.0}, {0.5, 0.25}}, RateForm::levels)));
  }

  TEST_CASE("event infima: closed form and grid minimization agree at grid 256") {
    struct Case {
      PathEvent e;
      double expect;
    };
    const Case cases[] = {{{PathEvent::Kind::endpoint, 1.0, 0.0, 1.0}, 0.5},
                          {{PathEvent::Kind::sup, 2.0, 0.0, 1.0}, 2.0},
                          {{PathEvent::Kind::increment, 1.0, 0.25, 0.75}, 1.0}};
    for (const auto& c : cases) {
      const EventInfimum inf = rate_event_infimum(c.e, 256);
      CHECK(inf.closed_form == doctest::Approx(c.expect).epsilon(1e-14));
      CHECK(std::abs(inf.grid_value - inf.closed_form) <= 1e-6);
    }
  }

  TEST_CASE("contraction consistency: constrained grid rate equals rate_Im(levels)") {
    const RatePartition parts[] = {{{0.25, 0.5, 1.0}, {0.5, -0.25, 1.0}}, {{0.125, 0.75}, {1.0, 1.0}}, {{1.0}, {1.0}}};
    for (const auto& p : parts)
      CHECK(std::abs(constrained_grid_rate(p, 256) - rate_Im(p, RateForm::levels)) <= 1e-6);
  }

  TEST_CASE("kernel_rate") {
    CHECK(kernel_rate(0.5, 0.39894, 1.0) == doctest::Approx(1.2533).epsilon(1e-4));
    CHECK(kernel_rate(0.0, 0.39894, 1.0) == 0.0);
    CHECK_THROWS_AS(kernel_rate(0.5, 0.0, 1.0), std::invalid_argument);
  }

  TEST_CASE("property: iid unit-variance breakpoints are within 1/n of t") {
    for (int n : {7, 50, 333}) {
      std::vector<double> row(n, 1.0), partials(n);
      for (int i = 0; i < n; ++i) partials[i] = i + 1.0;
      const PiecewisePath w = donsker_path(row, partials);
      for (double t = 0.0; t <= 1.0; t += 0.01) {
        const auto it = std::upper_bound(w.knots.begin(), w.knots.end(), t);
        const double breakpoint = *(it - 1);
        CHECK(std::abs(breakpoint - t) <= 1.0 / n + 1e-12);
      }
    }
  }

  TEST_CASE("invalid paths are rejected") {
    CHECK_THROWS_AS(linear({0.1, 1}, {0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(linear({0, 0.5, 0.5, 1}, {0, 1, 1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(linear({0, 1}, {0}), std::invalid_argument);
  }
}
