#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "mdplab/conditions.hpp"
#include "oracles.hpp"

using namespace mdplab;
using nlohmann::json;

namespace {

CoreSpec core(CoreSpec::Kind kind, double epsilon = 1.0, double beta = 1.0) {
  CoreSpec s;
  s.kind = kind;
  s.epsilon = epsilon;
  s.beta = beta;
  return s;
}

}  // namespace

TEST_SUITE("conditions") {
  TEST_CASE("judge: finite-grid verdict heuristic") {
    const std::vector<double> geometric{1, 0.5, 0.25, 0.125, 0.0625, 0.03125};
    CHECK(judge(geometric, Target::to_zero, 1.0) == Verdict::pass);
    const std::vector<double> flat{1e-3, 1e-3, 1e-3, 1e-3, 1e-3, 1e-3};
    CHECK(judge(flat, Target::to_zero, 1.0) == Verdict::fail);
    const std::vector<double> wiggle{1, 0.5, 0.6, 0.2, 0.3, 0.1};
    CHECK(judge(wiggle, Target::to_zero, 1.0) == Verdict::inconclusive);
    const std::vector<double> growing{1, 2, 3, 4, 5, 6};
    CHECK(judge(growing, Target::to_zero, 1.0) == Verdict::fail);
    const std::vector<double> to_minus_inf{-1, -2, -4, -8, -16, -32};
    CHECK(judge(to_minus_inf, Target::to_minus_inf, 0.0) == Verdict::pass);
    const std::vector<double> bounded{3, 2, 0.9, 0.8, 0.9};
    CHECK(judge(bounded, Target::bounded, 1.0) == Verdict::pass);
    const std::vector<double> with_nan{1, 0.5, std::nan("")};
    CHECK(judge(with_nan, Target::to_zero, 1.0) == Verdict::inconclusive);
    std::string why;
    judge(geometric, Target::to_zero, 1.0, &why);
    CHECK_FALSE(why.empty());
  }

  TEST_CASE("lindeberg: iid N(0,1), n a_n = 25, eps = 1") {
    const auto m = build_model(oracle::iid(oracle::gaussian(), oracle::power_speed(1.0, 25.0), {100, 400, 1600}));
    const auto r = check_core(m, m.speed(), core(CoreSpec::Kind::lindeberg));
    const double expect = 2.0 * (5.0 * oracle::phi(5.0) + oracle::Q(5.0));
    CHECK(expect == doctest::Approx(1.544e-5).epsilon(1e-3));
    for (double d : r.diagnostics) CHECK(d == doctest::Approx(expect).epsilon(1e-9));
    CHECK(r.verdict == Verdict::fail);  // n a_n held at 25: no decay
  }

  TEST_CASE("property: lindeberg diagnostic is nonincreasing in epsilon") {
    const auto m = build_model(oracle::iid(oracle::cexp(), oracle::power_speed(0.5), {100, 1000}));
    double prev = INFINITY;
    for (double eps : {0.1, 0.3, 1.0, 2.0, 4.0}) {
      const auto r = check_core(m, m.speed(), core(CoreSpec::Kind::lindeberg, eps));
      CHECK(r.diagnostics[1] <= prev);
      prev = r.diagnostics[1];
    }
  }

  TEST_CASE("exp_banded: bounded entries below the band give 0") {
    const auto m = build_model(oracle::iid(oracle::rademacher(), oracle::power_speed(0.5), {100, 400}));
    const auto r = check_core(m, m.speed(), core(CoreSpec::Kind::exp_banded));
    for (double d : r.diagnostics) CHECK(d == 0.0);
    CHECK(r.verdict == Verdict::pass);
  }

  TEST_CASE("tail_grid profile: centered exponential at u = 1") {
    const auto m = build_model(oracle::iid(oracle::cexp(), oracle::constant_speed(0.01), {10000}));
    const std::vector<double> u{1.0};
    const auto prof = tail_grid_profile(m, 10000, 0.01, 5.0, u);
    const double bare = 0.01 * 1e4 * std::exp(-11.0);
    CHECK(bare == doctest::Approx(1.670e-3).epsilon(1e-3));
    CHECK(prof[0] == doctest::Approx(bare * std::exp(5.0)).epsilon(1e-10));
    CHECK(bare <= std::exp(-5.0));
  }

  TEST_CASE("property: tail profile is nonincreasing in u") {
    const auto m = build_model(oracle::iid(oracle::gaussian(), oracle::power_speed(0.5), {400}));
    const auto u = default_u_grid(0.05);
    const auto prof = tail_grid_profile(m, 400, 0.05, 1e-12, u);
    for (std::size_t i = 1; i < prof.size(); ++i) CHECK(prof[i] <= prof[i - 1] * (1.0 + 1e-12));
  }

  TEST_CASE("regularity: s^2 = n, a = n^-1/2 gives c(4) = 64") {
    const auto m = build_model(oracle::iid(oracle::gaussian(), oracle::power_speed(0.5), {1, 4, 16, 64, 256}));
    const RegularityFns rc = build_regularity(m, m.speed());
    CHECK(rc.valid());
    bool truncated = true;
    CHECK(rc.c(4.0, &truncated) == doctest::Approx(64.0).epsilon(1e-12));
    CHECK_FALSE(truncated);
    for (double l : rc.l) CHECK(l == doctest::Approx(1.0));
    rc.c(1000.0, &truncated);
    CHECK(truncated);
  }

  TEST_CASE("regularity: constant speed inherits monotonicity of s^2") {
    const auto m = build_model(oracle::iid(oracle::gaussian(), oracle::constant_speed(0.1), {10, 20, 40}));
    CHECK(build_regularity(m, m.speed()).valid());
  }

  TEST_CASE("onecondm: bounded entries give -inf and pass") {
    const auto m = build_model(oracle::iid(oracle::rademacher(), oracle::power_speed(0.5), {4, 16, 64, 256}));
    const auto r = check_onecondm(m, m.speed(), build_regularity(m, m.speed()));
    for (std::size_t i = 0; i < r.diagnostics.size(); ++i) CHECK(r.diagnostics[i] == -INFINITY);
    CHECK(r.verdict == Verdict::pass);
  }

  TEST_CASE("onecondm: Gaussian oracle at n = 100, a = 0.04") {
    const auto m = build_model(oracle::iid(oracle::gaussian(), oracle::constant_speed(0.04), {100}));
    const auto r = check_onecondm(m, m.speed(), build_regularity(m, m.speed()));
    const double expect = 0.04 * (std::log(100.0) + std::log(2.0) + oracle::log_Q_large(50.0));
    CHECK(oracle::log_Q_large(50.0) == doctest::Approx(-1254.83).epsilon(1e-5));
    CHECK(r.diagnostics[0] == doctest::Approx(expect).epsilon(1e-9));
    CHECK(r.diagnostics[0] < -40.0);
  }

  TEST_CASE("sufficient: linear c = 1, n a_n = 100 gives max|c|/(sqrt(a) s) = 0.1") {
    json spec = {{"family", "linear-process"},
                 {"params", {{"innovation", oracle::gaussian()}, {"coefficients", {{"form", "constant"}, {"value", 1.0}}}}},
                 {"speed", oracle::power_speed(1.0, 100.0)},
                 {"n_grid", {1000, 4000}}};
    const auto m = build_model(spec);
    const auto r = check_sufficient(m, m.speed(), SufficientRoute::linear_coeffs);
    CHECK(r.condition_id == "sufficient.linear_coeffs.max_c");
    for (double d : r.diagnostics) CHECK(d == doctest::Approx(0.1).epsilon(1e-12));
    REQUIRE(r.parts.size() == 1);
  }

  TEST_CASE("sufficient: iid centered exponential gives -9.918 at n = 1e4") {
    const auto m = build_model(oracle::iid(oracle::cexp(), oracle::power_speed(0.5), {100, 1000, 10000}));
    const auto r = check_sufficient(m, m.speed(), SufficientRoute::iid);
    const double expect = 0.01 * (std::log(1e4) - 1.0 - 1000.0);
    CHECK(expect == doctest::Approx(-9.918).epsilon(1e-4));
    CHECK(r.diagnostics[2] == doctest::Approx(expect).epsilon(1e-10));
    CHECK(r.verdict == Verdict::pass);
  }

  TEST_CASE("sufficient: kernel moment envelope tends to 4") {
    json spec = {{"family", "kernel-row"},
                 {"params",
                  {{"kernel", "uniform"},
                   {"density", {{"mean", 0.0}, {"sd", 1.0}}},
                   {"bandwidth", {{"form", "power"}, {"scale", 1.0}, {"exponent", 0.5}}}}},
                 {"speed", oracle::power_speed(0.25)},
                 {"n_grid", {100, 10000, 1000000}}};
    const auto m = build_model(spec);
    const auto r = check_sufficient(m, m.speed(), SufficientRoute::moment_envelope, 5.0);
    REQUIRE(r.parts.size() == 1);
    CHECK(r.parts[0].diagnostics.back() == doctest::Approx(4.0).epsilon(0.01));
    CHECK_THROWS_AS(check_sufficient(m, m.speed(), SufficientRoute::linear_coeffs), std::invalid_argument);
  }

  TEST_CASE("exponential counterexample log tail") {
    CHECK(exp_counterexample_logtail(1.0, 0.01, 10.0) == doctest::Approx(-1.01));
    CHECK(exp_counterexample_logtail(1e-12, 0.01, 10.0) == doctest::Approx(-0.01));
    CHECK_THROWS_AS(exp_counterexample_logtail(0.0, 0.01, 10.0), std::invalid_argument);
  }

  TEST_CASE("necessity flag: raised exactly when a_n s_n^2 stays bounded") {
    // a_n s_n^2 = 1: k_n = sqrt(n) unit-variance entries, a_n = n^-1/2.
    json bounded = {{"family", "exponential-counterexample"},
                    {"params", {{"row_size", {{"form", "power"}, {"scale", 1.0}, {"exponent", 0.5}}}}},
                    {"speed", oracle::power_speed(0.5)},
                    {"n_grid", {100, 400, 1600, 6400, 25600, 102400}}};
    const auto mb = build_model(bounded);
    // Limit -t; the flag needs -t > -t^2/8, i.e. t > 8.
    CHECK_FALSE(exp_counterexample_necessity(mb, mb.speed(), 1.0).necessity_violated);
    CHECK_FALSE(exp_counterexample_necessity(mb, mb.speed(), 3.0).necessity_violated);
    CHECK(exp_counterexample_necessity(mb, mb.speed(), 10.0).necessity_violated);

    json growing = bounded;
    growing["params"]["row_size"] = {{"form", "identity"}};
    const auto mg = build_model(growing);
    for (double t : {1.0, 3.0, 10.0, 30.0}) CHECK_FALSE(exp_counterexample_necessity(mg, mg.speed(), t).necessity_violated);
  }

  TEST_CASE("comment-1 equivalence holds on Gaussian and exponential models") {
    for (const json& inn : {oracle::gaussian(), oracle::cexp()}) {
      const auto m = build_model(oracle::iid(inn, oracle::power_speed(0.5), {100, 1000, 10000}));
      for (double beta : {0.5, 1.0, 4.0}) {
        const auto eq = comment1_equivalence(m, m.speed(), beta);
        CHECK(eq.forward);
        CHECK(eq.backward);
        for (std::size_t i = 0; i < eq.n_grid.size(); ++i) CHECK(eq.log_c1_grid[i] <= eq.log_c1_upper[i] + 1e-12);
      }
    }
  }

  TEST_CASE("report serialization carries verdict and diagnostics") {
    const auto m = build_model(oracle::iid(oracle::gaussian(), oracle::power_speed(0.5), {100, 1000, 10000}));
    const auto r = check_core(m, m.speed(), core(CoreSpec::Kind::max_neg));
    const json j = r.to_json();
    CHECK(j.at("condition") == "max_neg");
    CHECK(j.at("diagnostics").size() == 3);
    CHECK(j.at("verdict") == to_string(r.verdict));
  }
}
