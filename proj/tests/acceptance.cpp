// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "mdplab/bounds.hpp"
#include "mdplab/conditions.hpp"
#include "mdplab/dependence.hpp"
#include "mdplab/mc_engine.hpp"
#include "mdplab/paths_rates.hpp"
#include "oracles.hpp"

using namespace mdplab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

MCConfig mc(long long per_batch, long long batches, std::uint64_t seed) {
  MCConfig c;
  c.per_batch = per_batch;
  c.batches = batches;
  c.seed = seed;
  return c;
}

// 1. Gaussian MDP convergence.
Outcome gaussian_mdp() {
  Outcome o;
  const std::vector<double> t{1.0};
  const std::vector<long long> n{100};
  std::vector<double> values;
  for (double a : {0.04, 0.01, 1e-3, 1e-4}) {
    const auto m = build_model(oracle::iid(oracle::gaussian(), oracle::constant_speed(a), {100}));
    const auto rows = mdp_curve(m, m.speed(), t, n, mc(10, 2, 1));
    o.require(rows[0].estimate.method == Method::exact, "analytic method not selected");
    values.push_back(rows[0].estimate.log_scaled);
  }
  const double want_04 = 0.04 * std::log(oracle::Q(5.0));
  const double want_1e4 = 1e-4 * oracle::log_Q_large(100.0);
  o.require(std::abs(values[0] - want_04) <= 1e-3 && std::abs(values[0] + 0.6026) <= 1e-3,
            "a=0.04: " + num(values[0]));
  o.require(std::abs(values[3] - want_1e4) <= 1e-3 && std::abs(values[3] + 0.5006) <= 1e-3,
            "a=1e-4: " + num(values[3]));
  for (std::size_t i = 1; i < values.size(); ++i)
    o.require(values[i] > values[i - 1] && values[i] < -0.5, "approach to -0.5 not monotone");
  o.detail = o.ok ? "log_scaled " + num(values[0]) + " -> " + num(values[3]) : o.detail;
  return o;
}

// 2. Cumulant limit.
Outcome cumulant_limit() {
  Outcome o;
  auto value = [](double na) {
    const long long n = 1000000;
    const auto m = build_model(oracle::iid(oracle::rademacher(), oracle::power_speed(1.0, na), {n}));
    return cumulant_check(m, m.speed(), 1.0, CumulantMode::analytic).values[0];
  };
  const double v100 = value(100.0), v1e4 = value(1e4);
  o.require(std::abs(v100 - 100.0 * std::log(std::cosh(0.1))) <= 1e-12, "closed form");
  o.require(std::abs(v100 - 0.499168) <= 1e-6, "0.499168: " + num(v100));
  o.require(std::abs(v100 - 0.5) <= 1e-3, "n a_n = 100: " + num(v100));
  o.require(std::abs(v1e4 - 0.5) <= 1e-5, "n a_n = 1e4: " + num(v1e4));
  if (o.ok) o.detail = "values " + num(v100) + ", " + num(v1e4);
  return o;
}

// 3. Importance sampling and crude estimator correctness.
Outcome importance_sampling() {
  Outcome o;
  const auto ex = build_model(oracle::iid(oracle::cexp(), oracle::power_speed(0.5), {10}));
  const double p_gamma = oracle::gamma_upper(10, 20.0);
  const TailEstimate is = is_tail(ex, ex.speed(), McEvent::endpoint_raw(10.0), 10, tilt_solve(ex, 10, 10.0), mc(10000, 10, 7));
  o.require(std::abs(is.p_hat - p_gamma) <= 3.0 * is.se, "tilted " + num(is.p_hat) + " vs " + num(p_gamma));
  o.require(is.relative_se() <= 0.01, "relative SE " + num(is.relative_se()));
  const auto rad = build_model(oracle::iid(oracle::rademacher(), oracle::power_speed(0.5), {100}));
  const double p_bin = oracle::binomial_upper(100, 60, 0.5);
  const TailEstimate cr = crude_tail(rad, rad.speed(), McEvent::endpoint_raw(20.0), 100, mc(100000, 10, 8));
  o.require(std::abs(cr.p_hat - p_bin) <= 3.0 * cr.se, "crude " + num(cr.p_hat) + " vs " + num(p_bin));
  if (o.ok)
    o.detail = "Gamma tail " + num(is.p_hat) + " (oracle " + num(p_gamma) + ", rel SE " + num(is.relative_se()) +
               "); binomial " + num(cr.p_hat) + " (oracle " + num(p_bin) + ")";
  return o;
}

// 4. Prokhorov dominance, P(S_n >= t sqrt(n)) against the bound at level t sqrt(n).
Outcome prokhorov_dominance() {
  Outcome o;
  const long long n = 100;
  const auto m = build_model(oracle::iid(oracle::rademacher(), oracle::power_speed(0.5), {n}));
  double worst = -1.0;
  for (int i = 0; i < 10; ++i) {
    const double t = 1.0 + 5.0 * i / 9.0;
    const double level = t * std::sqrt(static_cast<double>(n));
    const TailEstimate e = crude_tail(m, m.speed(), McEvent::endpoint_raw(level), n, mc(20000, 10, 100 + i));
    const double bound = prokhorov_bound(level, 1.0, static_cast<double>(n));
    worst = std::max(worst, e.p_hat - 3.0 * e.se - bound);
    o.require(e.p_hat - 3.0 * e.se <= bound, "t=" + num(t) + ": " + num(e.p_hat) + " > " + num(bound));
  }
  if (o.ok) o.detail = "max(p - 3SE - bound) = " + num(worst);
  return o;
}

// 5. Dependence coefficients.
Outcome dependence_coefficients() {
  Outcome o;
  const auto c = FiniteMarkovChain::two_state(0.9);
  double err = 0.0;
  for (int k = 1; k <= 20; ++k) {
    const double al = alpha_exact(c, k), ta = tau1_exact(c, k), lam = std::pow(0.8, k);
    err = std::max({err, std::abs(al - 0.25 * lam), std::abs(ta - lam), std::abs(ta - 4.0 * c.sup_norm() * al)});
  }
  o.require(err <= 1e-12, "coefficient error " + num(err));
  const std::vector<long long> grid{1000};
  const VarianceGrowth vg = variance_growth(c, grid);
  o.require(std::abs(vg.sigma2 - 9.0) <= 1e-9, "sigma2 " + num(vg.sigma2));
  o.require(std::abs(vg.var_over_n[0] - 8.96) <= 0.01, "Var(S_1000)/1000 " + num(vg.var_over_n[0]));
  if (o.ok) o.detail = "max coefficient error " + num(err) + ", Var(S_1000)/1000 = " + num(vg.var_over_n[0]);
  return o;
}

// 6. Blocking arithmetic, decomposition identity and m-dependent coupling.
Outcome blocking() {
  Outcome o;
  const BlockScheme s = plan_blocks(1000000, std::pow(1e6, -0.4));
  o.require(s.p == 1995 && s.q == 1000 && s.k == 333,
            "(p,q,k) = (" + std::to_string(s.p) + "," + std::to_string(s.q) + "," + std::to_string(s.k) + ")");
  const auto chain = FiniteMarkovChain::two_state(0.9);
  const auto x = sample_chain(chain, s.n, 5);
  std::vector<double> t;
  for (int i = 1; i <= 20; ++i) t.push_back(i / 20.0);
  const BlockSums b = block_sums(x, s, t);
  double resid = 0.0;
  for (std::size_t g = 0; g < t.size(); ++g) {
    const auto nt = static_cast<std::size_t>(std::floor(static_cast<double>(s.n) * t[g] + 1e-9));
    const auto kt = static_cast<std::size_t>(std::floor(static_cast<double>(s.k) * t[g] + 1e-9));
    double direct = 0.0, blocks = 0.0;
    for (std::size_t i = 0; i < nt; ++i) direct += x[i];
    for (std::size_t j = 0; j < kt; ++j) blocks += b.Y[j] + b.Z[j];
    resid = std::max(resid, std::abs(direct - blocks - b.remainder[g]));
  }
  o.require(resid <= 1e-9 * static_cast<double>(s.n) * chain.sup_norm(), "identity residual " + num(resid));
  const auto mdep = FiniteMarkovChain::moving_window(3);
  const CouplingReport cr = couple_blocks(mdep, make_scheme(120, 16, 4), 10000, 9);
  o.require(cr.max_abs_corr <= 3.0 / std::sqrt(10000.0), "max |corr| " + num(cr.max_abs_corr));
  if (o.ok) o.detail = "residual " + num(resid) + ", max |corr| " + num(cr.max_abs_corr) + " <= 0.03";
  return o;
}

// 7. Rate-function suite.
Outcome rate_suite() {
  Outcome o;
  auto path = [](std::vector<double> k, std::vector<double> v) {
    PiecewisePath p;
    p.knots = std::move(k);
    p.values = std::move(v);
    return p;
  };
  o.require(std::abs(rate_I(path({0, 1}, {0, 1})) - 0.5) <= 1e-15, "z(t) = t");
  o.require(std::abs(rate_I(path({0, 0.5, 1}, {0, 1, 1})) - 1.0) <= 1e-15, "ramp");
  o.require(rate_I(path({0, 1}, {0, 0})) == 0.0, "zero path");
  const RatePartition lv{{0.25, 0.5, 1.0}, {0.5, -0.25, 1.0}};
  const RatePartition inc{{0.25, 0.5, 1.0}, {0.5, -0.75, 1.25}};
  o.require(std::abs(rate_Im(lv, RateForm::levels) - rate_Im(inc, RateForm::increments)) <= 1e-12, "levels vs increments");
  o.require(std::abs(rate_Im({{0.5, 1.0}, {1.0, 1.0}}, RateForm::levels) - 1.0) <= 1e-15, "levels example");
  o.require(std::abs(constrained_grid_rate(lv, 256) - rate_Im(lv, RateForm::levels)) <= 1e-6, "contraction");
  double gap = 0.0;
  const PathEvent events[] = {{PathEvent::Kind::endpoint, 1.0, 0.0, 1.0},
                              {PathEvent::Kind::sup, 2.0, 0.0, 1.0},
                              {PathEvent::Kind::increment, 1.0, 0.25, 0.75}};
  const double closed[] = {0.5, 2.0, 1.0};
  for (int i = 0; i < 3; ++i) {
    const EventInfimum inf = rate_event_infimum(events[i], 256);
    gap = std::max(gap, std::abs(inf.grid_value - closed[i]));
    o.require(std::abs(inf.closed_form - closed[i]) <= 1e-14, "closed form " + std::to_string(i));
  }
  o.require(gap <= 1e-6, "grid gap " + num(gap));
  if (o.ok) o.detail = "max grid gap " + num(gap);
  return o;
}

// 8. Condition-calculus implications on the model suite.
Outcome condition_calculus() {
  Outcome o;
  const json grid = {100, 1000, 10000, 100000};
  const json sqrt_speed = oracle::power_speed(0.5);
  struct Named {
    std::string name;
    json spec;
  };
  const std::vector<Named> suite = {
      {"gaussian", oracle::iid(oracle::gaussian(), sqrt_speed, grid)},
      {"exponential", oracle::iid(oracle::cexp(), sqrt_speed, grid)},
      {"linear", {{"family", "linear-process"},
                  {"params", {{"innovation", oracle::gaussian()}, {"coefficients", {{"form", "constant"}, {"value", 1.0}}}}},
                  {"speed", sqrt_speed},
                  {"n_grid", grid}}},
      {"kernel", {{"family", "kernel-row"},
                  {"params",
                   {{"kernel", "uniform"},
                    {"density", {{"mean", 0.0}, {"sd", 1.0}}},
                    {"bandwidth", {{"form", "power"}, {"scale", 1.0}, {"exponent", 0.5}}}}},
                  {"speed", oracle::power_speed(0.25)},
                  {"n_grid", grid}}},
      {"counterexample", {{"family", "exponential-counterexample"},
                          {"params", {{"row_size", {{"form", "power"}, {"scale", 1.0}, {"exponent", 0.5}}}}},
                          {"speed", sqrt_speed},
                          {"n_grid", grid}}},
  };
  auto spec = [](CoreSpec::Kind k) {
    CoreSpec s;
    s.kind = k;
    return s;
  };
  int premises = 0;
  std::string verdicts;
  for (const auto& [name, js] : suite) {
    const auto m = build_model(js);
    const auto full = check_core(m, m.speed(), spec(CoreSpec::Kind::exp_full));
    verdicts += name + ":" + to_string(full.verdict) + " ";
    if (full.verdict != Verdict::pass) continue;
    ++premises;
    for (auto k : {CoreSpec::Kind::exp_banded, CoreSpec::Kind::max_neg, CoreSpec::Kind::lindeberg}) {
      const auto r = check_core(m, m.speed(), spec(k));
      o.require(r.verdict == Verdict::pass, name + ": exp_full passes but " + r.condition_id + " is " + to_string(r.verdict));
    }
  }
  o.require(premises >= 2, "implication exercised on " + std::to_string(premises) + " models");
  for (int i : {0, 1}) {
    const auto m = build_model(suite[static_cast<std::size_t>(i)].spec);
    for (double beta : {0.5, 1.0, 4.0}) {
      const auto eq = comment1_equivalence(m, m.speed(), beta);
      o.require(eq.forward && eq.backward, suite[static_cast<std::size_t>(i)].name + " comment-1 beta=" + num(beta));
    }
  }
  const auto bounded = build_model(suite[4].spec);
  json growing_spec = suite[4].spec;
  growing_spec["params"]["row_size"] = {{"form", "identity"}};
  const auto growing = build_model(growing_spec);
  for (double t : {1.0, 3.0, 10.0, 30.0}) {
    const bool fb = exp_counterexample_necessity(bounded, bounded.speed(), t).necessity_violated;
    const bool fg = exp_counterexample_necessity(growing, growing.speed(), t).necessity_violated;
    o.require(fb == (t > 8.0), "bounded a s^2 flag at t=" + num(t));
    o.require(!fg, "growing a s^2 flagged at t=" + num(t));
  }
  if (o.ok) o.detail = "exp_full " + verdicts + "; implication held on " + std::to_string(premises) + " models";
  return o;
}

// 9. Kernel variance and moment envelope.
Outcome kernel_module() {
  Outcome o;
  const json spec = {{"family", "kernel-row"},
                     {"params",
                      {{"kernel", "uniform"},
                       {"density", {{"mean", 0.0}, {"sd", 1.0}}},
                       {"bandwidth", {{"form", "power"}, {"scale", 1.0}, {"exponent", 0.5}}}}},
                     {"speed", oracle::power_speed(0.25)},
                     {"n_grid", {100, 10000, 1000000}}};
  const auto m = build_model(spec);
  const double var = row_moments(m, 1000000).variances[0];  // h = 1e-3
  const double target = oracle::phi(0.0);
  o.require(std::abs(var - target) <= 0.01 * target, "Var(Y) " + num(var));
  const auto r = check_sufficient(m, m.speed(), SufficientRoute::moment_envelope, 5.0);
  const double env = r.parts.at(0).diagnostics.back();
  o.require(std::abs(env - 4.0) <= 0.05, "envelope " + num(env));
  if (o.ok) o.detail = "Var(Y) = " + num(var) + ", envelope = " + num(env);
  return o;
}

// 10. Byte-identical reports across thread counts.
Outcome determinism() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / ("mdplab_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  const json sim = {{"task", "simulate"},
                    {"seed", 2024},
                    {"model", {{"family", "iid"}, {"params", {{"innovation", oracle::cexp()}}}}},
                    {"speed", oracle::power_speed(0.5)},
                    {"n_grid", {50, 200}},
                    {"simulate", {{"t_grid", {0.25, 0.5, 1.0}}, {"mc", {{"per_batch", 2000}, {"batches", 8}}}}}};
  json crude = sim;
  crude["simulate"]["method"] = "crude";
  const json check = {{"task", "check"},
                      {"seed", 2024},
                      {"model", {{"family", "iid"}, {"params", {{"innovation", {{"law", "gaussian"}, {"exact", false}}}}}}},
                      {"speed", oracle::power_speed(0.5)},
                      {"n_grid", {100, 400, 1600}},
                      {"check", {{"conditions", {{{"kind", "lindeberg"}, {"epsilon", 0.5}}, {{"kind", "max_neg"}}}}}}};
  const std::pair<std::string, json> runs[] = {{"simulate", sim}, {"simulate", crude}, {"check", check}};
  int idx = 0;
  for (const auto& [task, cfg] : runs) {
    const fs::path file = dir / ("config" + std::to_string(idx) + ".json");
    std::ofstream(file) << cfg.dump(2);
    std::string reports[2];
    const char* threads[2] = {"1", "4"};
    for (int r = 0; r < 2; ++r) {
      const fs::path out = dir / ("out" + std::to_string(idx) + "_" + threads[r]);
      const std::string cmd = std::string("MDPLAB_THREADS=") + threads[r] + " '" + MDPLAB_CLI + "' " + task +
                              " --config '" + file.string() + "' --out '" + out.string() + "' > /dev/null 2>&1";
      const int status = std::system(cmd.c_str());
      std::ifstream in(out / "report.json", std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      reports[r] = ss.str();
      o.require(status != -1 && WIFEXITED(status) && WEXITSTATUS(status) != 2, task + " run failed");
    }
    o.require(!reports[0].empty() && reports[0] == reports[1], task + " reports differ (config " + std::to_string(idx) + ")");
    ++idx;
  }
  fs::remove_all(dir);
  if (o.ok) o.detail = "3 configs, threads 1 vs 4, report.json byte-identical";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {1, "Gaussian MDP convergence", 1.0, gaussian_mdp},
      {2, "cumulant limit", 1.0, cumulant_limit},
      {3, "importance sampling correctness", 60.0, importance_sampling},
      {4, "Prokhorov dominance", 60.0, prokhorov_dominance},
      {5, "dependence coefficients", 5.0, dependence_coefficients},
      {6, "blocking arithmetic and identity", 60.0, blocking},
      {7, "rate-function suite", 10.0, rate_suite},
      {8, "condition-calculus implications", 120.0, condition_calculus},
      {9, "kernel module", 30.0, kernel_module},
      {10, "determinism across thread counts", 60.0, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.budget_s) {
      o.ok = false;
      o.detail += " (over the " + num(c.budget_s) + " s budget)";
    }
    if (!o.ok) ++failures;
    std::printf("%s [%d] %s (%.2f s) %s\n", o.ok ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
