#include "mdplab/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mdplab/json_util.hpp"
#include "mdplab/numeric.hpp"
#include "mdplab/parallel.hpp"

namespace mdplab {

using nlohmann::json;

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

std::string to_string(Target t) {
  switch (t) {
    case Target::to_zero: return "-> 0";
    case Target::to_minus_inf: return "-> -inf";
    case Target::bounded: return "<= bound";
  }
  return "?";
}

// ------------------------------------------------------------------ verdict

namespace {

Verdict judge_decay(std::span<const double> lr, std::string& why) {
  if (std::all_of(lr.begin(), lr.end(), [](double x) { return x == -kInf; })) {
    why = "identically zero on the grid tail";
    return Verdict::pass;
  }
  if (lr.size() < 2) {
    why = "grid too short for a trend";
    return Verdict::inconclusive;
  }
  auto le = [](double a, double b) {  // a <= b up to round-off
    if (a == -kInf) return true;
    if (b == -kInf) return false;
    return a <= b + 1e-12 * std::max(1.0, std::abs(b));
  };
  bool nonincreasing = true, nondecreasing = true;
  for (std::size_t i = 1; i < lr.size(); ++i) {
    nonincreasing = nonincreasing && le(lr[i], lr[i - 1]);
    nondecreasing = nondecreasing && le(lr[i - 1], lr[i]);
  }
  if (!nonincreasing && !nondecreasing) {
    why = "non-monotone grid tail";
    return Verdict::inconclusive;
  }
  if (!nonincreasing) {
    why = "increasing on the grid tail";
    return Verdict::fail;
  }
  if (lr.back() == -kInf) {
    why = "reaches zero on the grid tail";
    return Verdict::pass;
  }
  const double drop = lr.front() - lr.back();
  if (drop < std::log(2.0)) {
    why = "flat on the grid tail (decay below a factor 2)";
    return Verdict::fail;
  }
  std::vector<double> idx(lr.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<double>(i);
  const LinearFit fit = fit_line(idx, lr);
  if (fit.slope < 0.0 && fit.r2 >= 0.9) {
    why = "geometric decay (R^2 = " + std::to_string(fit.r2) + ")";
    return Verdict::pass;
  }
  const double first_step = lr[0] - lr[1];
  const double last_step = lr[lr.size() - 2] - lr.back();
  if (last_step >= first_step) {
    why = "accelerating decay";
    return Verdict::pass;
  }
  why = "decay slowing down (limit looks nonzero)";
  return Verdict::fail;
}

}  // namespace

Verdict judge(std::span<const double> d, Target target, double bound, std::string* reason) {
  std::string why;
  Verdict v = Verdict::inconclusive;
  if (d.empty()) {
    why = "empty grid";
  } else if (std::any_of(d.begin(), d.end(), [](double x) { return std::isnan(x); })) {
    why = "diagnostic unavailable on part of the grid";
  } else {
    const std::size_t N = d.size();
    const std::size_t L = N < 3 ? N : std::max<std::size_t>(3, (N + 2) / 3);
    const auto tail = d.subspan(N - L);
    if (target == Target::bounded) {
      const double tol = 1e-12 * std::max(1.0, std::abs(bound));
      if (std::all_of(tail.begin(), tail.end(), [&](double x) { return x <= bound + tol; })) {
        v = Verdict::pass;
        why = "grid tail within bound";
      } else if (tail.back() > bound + tol) {
        v = Verdict::fail;
        why = "grid tail exceeds bound";
      } else {
        why = "grid tail crosses the bound";
      }
    } else {
      std::vector<double> lr(tail.size());
      for (std::size_t i = 0; i < tail.size(); ++i)
        lr[i] = target == Target::to_zero ? (tail[i] == 0.0 ? -kInf : std::log(std::abs(tail[i]))) : tail[i];
      if (target == Target::to_minus_inf &&
          std::any_of(lr.begin(), lr.end(), [](double x) { return x == kInf; })) {
        v = Verdict::fail;
        why = "diagnostic infinite";
      } else {
        v = judge_decay(lr, why);
      }
    }
  }
  if (reason) *reason = why;
  return v;
}

json ConditionReport::to_json() const {
  json j = {{"condition", condition_id},
            {"n_grid", n_grid},
            {"diagnostics", json_reals(diagnostics)},
            {"se", json_reals(diagnostic_se)},
            {"target", to_string(target)},
            {"verdict", to_string(verdict)},
            {"reason", reason},
            {"params", params},
            {"flags", flags}};
  if (target == Target::bounded) j["bound"] = json_real(bound);
  if (!parts.empty()) {
    j["parts"] = json::array();
    for (const auto& p : parts) j["parts"].push_back(p.to_json());
  }
  return j;
}

namespace {

Verdict worst(Verdict a, Verdict b) {
  if (a == Verdict::fail || b == Verdict::fail) return Verdict::fail;
  if (a == Verdict::inconclusive || b == Verdict::inconclusive) return Verdict::inconclusive;
  return Verdict::pass;
}

void finish(ConditionReport& r) {
  r.verdict = judge(r.diagnostics, r.target, r.bound, &r.reason);
  for (const auto& p : r.parts) {
    if (worst(r.verdict, p.verdict) != r.verdict) r.reason = p.condition_id + ": " + p.reason;
    r.verdict = worst(r.verdict, p.verdict);
  }
}

struct RowContext {
  long long n = 0;
  double a = 0.0;
  double s2 = 0.0;
  double s = 0.0;
  long long k = 0;
  std::vector<LawGroup> groups;
};

RowContext context(const TriangularArrayModel& model, const SpeedSequence& speed, long long n) {
  RowContext c;
  c.n = n;
  c.a = speed(n);
  c.s2 = model.total_variance(n);
  if (!(c.s2 > 0.0)) throw std::domain_error("zero total variance at n = " + std::to_string(n));
  c.s = std::sqrt(c.s2);
  c.k = model.row_size(n);
  c.groups = model.row_laws(n);
  return c;
}

// log sum_g count_g exp(term_g)
template <class F>
double log_group_sum(const std::vector<LawGroup>& groups, F&& term) {
  std::vector<double> parts;
  parts.reserve(groups.size());
  for (const auto& g : groups) parts.push_back(std::log(static_cast<double>(g.count)) + term(*g.law));
  return log_sum_exp(parts);
}

// a_n log P(max_j |X_nj| >= x) through 1 - prod(1 - p_j) in log space.
double log_max_tail(const std::vector<LawGroup>& groups, double x) {
  std::vector<double> lp;
  for (const auto& g : groups) lp.push_back(g.law->log_prob(Band::at_least(x)).value);
  std::vector<double> weighted;
  for (std::size_t i = 0; i < groups.size(); ++i)
    weighted.push_back(std::log(static_cast<double>(groups[i].count)) + lp[i]);
  const double union_bound = log_sum_exp(weighted);
  if (union_bound < -30.0) return union_bound;
  double log_none = 0.0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (lp[i] == 0.0) return 0.0;
    log_none += static_cast<double>(groups[i].count) * std::log1p(-std::exp(lp[i]));
  }
  return log1m_exp(log_none);
}

}  // namespace

// -------------------------------------------------------------- check_core

CoreSpec CoreSpec::from_json(const json& j) {
  CoreSpec s;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "lindeberg") s.kind = Kind::lindeberg;
  else if (kind == "exp_banded") s.kind = Kind::exp_banded;
  else if (kind == "exp_full") s.kind = Kind::exp_full;
  else if (kind == "tail_grid") s.kind = Kind::tail_grid;
  else if (kind == "max_neg") s.kind = Kind::max_neg;
  else throw std::invalid_argument("unknown condition '" + kind + "'");
  s.epsilon = j.value("epsilon", 1.0);
  s.beta = j.value("beta", 1.0);
  s.c1 = j.value("c1", 1.0);
  if (j.contains("u_grid")) s.u_grid = j.at("u_grid").get<std::vector<double>>();
  s.extend_below_one = j.value("extend_below_one", false);
  if (!(s.epsilon > 0.0) || !(s.beta > 0.0) || !(s.c1 > 0.0))
    throw std::invalid_argument("condition parameters must be positive");
  return s;
}

std::string CoreSpec::id() const {
  switch (kind) {
    case Kind::lindeberg: return "lindeberg";
    case Kind::exp_banded: return "exp_banded";
    case Kind::exp_full: return "exp_full";
    case Kind::tail_grid: return "tail_grid";
    case Kind::max_neg: return "max_neg";
  }
  return "?";
}

json CoreSpec::to_json() const {
  json j = {{"kind", id()}};
  switch (kind) {
    case Kind::lindeberg: j["epsilon"] = epsilon; break;
    case Kind::exp_banded: j["beta"] = beta; break;
    case Kind::exp_full:
      j["beta"] = beta;
      j["epsilon"] = epsilon;
      break;
    case Kind::tail_grid:
      j["beta"] = beta;
      j["c1"] = c1;
      if (!u_grid.empty()) j["u_grid"] = u_grid;
      if (extend_below_one) j["epsilon"] = epsilon;
      break;
    case Kind::max_neg: break;
  }
  return j;
}

std::vector<double> default_u_grid(double a_n, std::optional<double> extend_from) {
  std::vector<double> u;
  if (extend_from && *extend_from < 1.0) {
    const double lo = std::log(*extend_from);
    for (int i = 0; i < 32; ++i) u.push_back(std::exp(lo * (1.0 - i / 32.0)));
  }
  const double hi = std::log(std::max(1.0, 1.0 / a_n));
  for (int i = 0; i < 64; ++i) u.push_back(std::exp(hi * i / 63.0));
  u.back() = std::max(1.0, 1.0 / a_n);
  return u;
}

std::vector<double> tail_grid_profile(const TriangularArrayModel& model, long long n, double a_n, double beta,
                                      std::span<const double> u_grid) {
  const double s = std::sqrt(model.total_variance(n));
  const auto groups = model.row_laws(n);
  std::vector<double> out;
  for (double u : u_grid) {
    const double x = u * std::sqrt(a_n) * s;
    const double lp = log_group_sum(groups, [&](const EntryLaw& law) { return law.log_prob(Band::above(x)).value; });
    out.push_back(std::exp(std::log(a_n) + lp + beta * u));
  }
  return out;
}

ConditionReport check_core(const TriangularArrayModel& model, const SpeedSequence& a, const CoreSpec& spec) {
  ConditionReport r;
  r.condition_id = spec.id();
  r.n_grid = model.n_grid();
  r.params = spec.to_json();
  const auto N = static_cast<long long>(r.n_grid.size());
  r.diagnostics.assign(static_cast<std::size_t>(N), 0.0);
  r.diagnostic_se.assign(static_cast<std::size_t>(N), 0.0);
  std::vector<std::string> unavailable(static_cast<std::size_t>(N));
  std::vector<double> c1_seen(static_cast<std::size_t>(N), 0.0);

  switch (spec.kind) {
    case CoreSpec::Kind::lindeberg:
    case CoreSpec::Kind::exp_banded:
    case CoreSpec::Kind::exp_full: r.target = Target::to_zero; break;
    case CoreSpec::Kind::tail_grid:
      r.target = Target::bounded;
      r.bound = 1.0;
      break;
    case CoreSpec::Kind::max_neg: r.target = Target::to_minus_inf; break;
  }

  parallel_for(N, [&](long long idx) {
    const auto i = static_cast<std::size_t>(idx);
    const RowContext c = context(model, a, r.n_grid[i]);
    const double ra = std::sqrt(c.a);
    double value = 0.0, se = 0.0;
    try {
      switch (spec.kind) {
        case CoreSpec::Kind::lindeberg: {
          const Band band = Band::at_least(spec.epsilon * c.s * ra);
          CompensatedSum sum;
          double var = 0.0;
          for (const auto& g : c.groups) {
            const Estimate e = g.law->moment(band, 2);
            sum.add(static_cast<double>(g.count) * e.value);
            var += std::pow(static_cast<double>(g.count) * e.se, 2);
          }
          value = sum.value() / c.s2;
          se = std::sqrt(var) / c.s2;
          break;
        }
        case CoreSpec::Kind::exp_banded:
        case CoreSpec::Kind::exp_full: {
          const Band band = spec.kind == CoreSpec::Kind::exp_banded ? Band::open(ra * c.s, c.s / ra)
                                                                    : Band::above(spec.epsilon * ra * c.s);
          if (band.empty()) break;
          const double lambda = spec.beta / (ra * c.s);
          double rel2 = 0.0;
          const double lsum = log_group_sum(c.groups, [&](const EntryLaw& law) {
            const Estimate e = law.log_exp_moment(lambda, band);
            rel2 = std::max(rel2, e.se * e.se);
            return e.value;
          });
          value = std::exp(std::log(c.a) + lsum);
          se = value * std::sqrt(rel2);
          break;
        }
        case CoreSpec::Kind::tail_grid: {
          const std::vector<double> u = spec.u_grid.empty()
                                            ? default_u_grid(c.a, spec.extend_below_one
                                                                      ? std::optional<double>(spec.epsilon)
                                                                      : std::nullopt)
                                            : spec.u_grid;
          const auto prof = tail_grid_profile(model, c.n, c.a, spec.beta, u);
          const double m = *std::max_element(prof.begin(), prof.end());
          c1_seen[i] = m;
          value = m / spec.c1;
          break;
        }
        case CoreSpec::Kind::max_neg: value = c.a * log_max_tail(c.groups, c.s / ra); break;
      }
    } catch (const UnavailableError& e) {
      value = kNaN;
      unavailable[i] = e.what();
    }
    r.diagnostics[i] = value;
    r.diagnostic_se[i] = se;
  });

  for (std::size_t i = 0; i < unavailable.size(); ++i)
    if (!unavailable[i].empty()) {
      r.flags.push_back("n=" + std::to_string(r.n_grid[i]) + ": " + unavailable[i]);
    }
  if (spec.kind == CoreSpec::Kind::tail_grid && !c1_seen.empty())
    r.params["c1_empirical"] = json_real(*std::max_element(c1_seen.begin(), c1_seen.end()));
  finish(r);
  if (!r.flags.empty() && r.verdict == Verdict::inconclusive) r.reason += " (" + r.flags.front() + ")";
  return r;
}

// -------------------------------------------------------------- regularity

RegularityFns build_regularity(const TriangularArrayModel& model, const SpeedSequence& a) {
  RegularityFns rc;
  rc.knots = model.n_grid();
  std::sort(rc.knots.begin(), rc.knots.end());
  for (long long n : rc.knots) {
    const double s2 = model.total_variance(n);
    const double an = a(n);
    rc.f.push_back(s2 * an);
    rc.g.push_back(s2 / an);
    rc.l.push_back(s2 / static_cast<double>(model.row_size(n)));
  }
  for (std::size_t i = 1; i < rc.knots.size(); ++i) {
    const std::string at = " between n = " + std::to_string(rc.knots[i - 1]) + " and " + std::to_string(rc.knots[i]);
    if (!(rc.f[i] > rc.f[i - 1])) rc.violations.push_back("f = s^2 a not strictly increasing" + at);
    if (!(rc.g[i] > rc.g[i - 1])) rc.violations.push_back("g = s^2 / a not strictly increasing" + at);
    if (rc.l[i] < rc.l[i - 1]) rc.violations.push_back("l = s^2 / k decreasing" + at);
  }
  return rc;
}

double RegularityFns::c(double x, bool* truncated) const {
  if (truncated) *truncated = false;
  if (knots.empty()) throw std::logic_error("regularity: empty grid");
  auto interp = [](std::span<const double> xs, std::span<const double> ys, double v) {
    const auto it = std::upper_bound(xs.begin(), xs.end(), v);
    if (it == xs.begin()) return ys.front();
    if (it == xs.end()) return ys.back();
    const auto i = static_cast<std::size_t>(it - xs.begin());
    const double w = (v - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return ys[i - 1] + w * (ys[i] - ys[i - 1]);
  };
  std::vector<double> xs(knots.begin(), knots.end());
  const double last = xs.back();
  if (x > last || x < xs.front()) {
    if (truncated) *truncated = true;
    if (x > last) return last;
  }
  const double gx = interp(xs, g, x);
  if (gx > f.back()) {
    if (truncated) *truncated = true;
    return last;
  }
  if (!valid()) {
    if (truncated) *truncated = true;
  }
  // Inverse interpolation of f at the knot pair bracketing gx.
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] == gx) return xs[i];
    if (i > 0 && f[i - 1] < gx && gx < f[i]) {
      const double w = (gx - f[i - 1]) / (f[i] - f[i - 1]);
      return xs[i - 1] + w * (xs[i] - xs[i - 1]);
    }
  }
  return xs.front();
}

json RegularityFns::to_json() const {
  return {{"knots", knots}, {"f", json_reals(f)}, {"g", json_reals(g)}, {"l", json_reals(l)},
          {"violations", violations}, {"valid", valid()}};
}

namespace {

// Rows m with n <= m <= c(n+1) that the model can be evaluated at: n itself,
// the grid points in range and floor(c(n+1)) when it stays tabulated.
std::vector<long long> sup_range(const RegularityFns& rc, long long n, bool* truncated) {
  const double upper = rc.c(static_cast<double>(n + 1), truncated);
  std::vector<long long> ms = {n};
  for (long long m : rc.knots)
    if (m > n && static_cast<double>(m) <= upper) ms.push_back(m);
  const long long top = robust_floor(upper);
  if (top > n && std::find(ms.begin(), ms.end(), top) == ms.end()) ms.push_back(top);
  return ms;
}

}  // namespace

ConditionReport check_onecondm(const TriangularArrayModel& model, const SpeedSequence& a, const RegularityFns& rc) {
  ConditionReport r;
  r.condition_id = "onecondm";
  r.n_grid = model.n_grid();
  r.target = Target::to_minus_inf;
  r.params = {{"regularity", rc.to_json()}};
  const auto N = static_cast<long long>(r.n_grid.size());
  r.diagnostics.assign(static_cast<std::size_t>(N), 0.0);
  r.diagnostic_se.assign(static_cast<std::size_t>(N), 0.0);
  std::vector<char> trunc(static_cast<std::size_t>(N), 0);

  parallel_for(N, [&](long long idx) {
    const auto i = static_cast<std::size_t>(idx);
    const long long n = r.n_grid[i];
    const RowContext c = context(model, a, n);
    const double threshold = c.s / std::sqrt(c.a);
    bool truncated = false;
    double best = -kInf;
    for (long long m : sup_range(rc, n, &truncated)) {
      std::vector<LawGroup> groups;
      try {
        groups = model.row_laws(m);
      } catch (const std::exception&) {
        truncated = true;
        continue;
      }
      for (const auto& g : groups) best = std::max(best, g.law->log_prob(Band::above(threshold)).value);
    }
    trunc[i] = truncated ? 1 : 0;
    r.diagnostics[i] = c.a * (std::log(static_cast<double>(c.k)) + best);
  });
  for (std::size_t i = 0; i < trunc.size(); ++i)
    if (trunc[i]) r.flags.push_back("n=" + std::to_string(r.n_grid[i]) + ": sup over [n, c(n+1)] truncated");
  if (!rc.valid()) r.flags.push_back("regularity conditions violated");
  finish(r);
  return r;
}

// -------------------------------------------------------------- sufficient

SufficientRoute parse_route(const std::string& tag) {
  if (tag == "moment_envelope") return SufficientRoute::moment_envelope;
  if (tag == "linear_coeffs") return SufficientRoute::linear_coeffs;
  if (tag == "iid") return SufficientRoute::iid;
  throw std::invalid_argument("unknown route '" + tag + "'");
}

std::string to_string(SufficientRoute r) {
  switch (r) {
    case SufficientRoute::moment_envelope: return "moment_envelope";
    case SufficientRoute::linear_coeffs: return "linear_coeffs";
    case SufficientRoute::iid: return "iid";
  }
  return "?";
}

ConditionReport check_sufficient(const TriangularArrayModel& model, const SpeedSequence& a, SufficientRoute route,
                                 std::optional<double> bound_c) {
  ConditionReport r;
  r.condition_id = "sufficient." + to_string(route);
  r.n_grid = model.n_grid();
  const std::size_t N = r.n_grid.size();
  r.diagnostics.assign(N, 0.0);
  r.diagnostic_se.assign(N, 0.0);

  const bool linear =
      model.family() == Family::linear_process || model.family() == Family::exponential_counterexample;
  switch (route) {
    case SufficientRoute::moment_envelope: {
      if (!model.moment_envelope(r.n_grid.empty() ? 1 : r.n_grid.front()))
        throw std::invalid_argument("route/model mismatch: model has no moment envelope");
      ConditionReport second;
      second.condition_id = r.condition_id + ".B_sum_A2";
      second.n_grid = r.n_grid;
      second.diagnostics.assign(N, 0.0);
      second.diagnostic_se.assign(N, 0.0);
      second.target = Target::bounded;
      r.condition_id += ".max_A";
      r.target = Target::to_zero;
      for (std::size_t i = 0; i < N; ++i) {
        const RowContext c = context(model, a, r.n_grid[i]);
        const MomentEnvelope env = *model.moment_envelope(c.n);
        const double amax = env.A.empty() ? 0.0 : *std::max_element(env.A.begin(), env.A.end());
        CompensatedSum s;
        for (double x : env.A) s.add(x * x);
        r.diagnostics[i] = amax / (std::sqrt(c.a) * c.s);
        second.diagnostics[i] = env.B / c.s2 * s.value();
      }
      if (bound_c) {
        second.bound = *bound_c;
      } else {
        const std::size_t L = N < 3 ? N : std::max<std::size_t>(3, (N + 2) / 3);
        second.bound = N ? 2.0 * std::abs(second.diagnostics[N - L]) : 1.0;
        second.flags.push_back("no constant given; bound set to twice the grid-tail start");
      }
      second.params = {{"C", second.bound}};
      finish(second);
      r.parts.push_back(std::move(second));
      break;
    }
    case SufficientRoute::linear_coeffs: {
      if (!linear) throw std::invalid_argument("route/model mismatch: linear_coeffs needs a linear-process model");
      const RegularityFns rc = build_regularity(model, a);
      const LawPtr xi = model.innovation()->scaled(1.0);
      ConditionReport second;
      second.condition_id = r.condition_id + ".tail";
      second.n_grid = r.n_grid;
      second.diagnostics.assign(N, 0.0);
      second.diagnostic_se.assign(N, 0.0);
      second.target = Target::to_minus_inf;
      r.condition_id += ".max_c";
      r.target = Target::to_zero;
      for (std::size_t i = 0; i < N; ++i) {
        const RowContext c = context(model, a, r.n_grid[i]);
        const double cmax = model.coefficients()->max_abs(c.k);
        r.diagnostics[i] = cmax / (std::sqrt(c.a) * c.s);
        bool truncated = false;
        double Cn = cmax;
        for (long long m : sup_range(rc, c.n, &truncated)) {
          try {
            Cn = std::max(Cn, model.coefficients()->max_abs(model.row_size(m)));
          } catch (const std::exception&) {
            truncated = true;
          }
        }
        if (truncated) second.flags.push_back("n=" + std::to_string(c.n) + ": C_n sup truncated");
        const double lp = Cn > 0.0 ? xi->log_prob(Band::above(c.s / (Cn * std::sqrt(c.a)))).value : -kInf;
        second.diagnostics[i] = c.a * (std::log(static_cast<double>(c.k)) + lp);
      }
      finish(second);
      r.parts.push_back(std::move(second));
      break;
    }
    case SufficientRoute::iid: {
      r.target = Target::to_minus_inf;
      for (std::size_t i = 0; i < N; ++i) {
        const RowContext c = context(model, a, r.n_grid[i]);
        if (c.groups.size() != 1 || !model.laws_independent_of_n())
          throw std::invalid_argument("route/model mismatch: iid route needs identically distributed entries");
        const double lp = c.groups[0].law->log_prob(Band::above(c.s / std::sqrt(c.a))).value;
        r.diagnostics[i] = c.a * (std::log(static_cast<double>(c.k)) + lp);
      }
      break;
    }
  }
  finish(r);
  return r;
}

// -------------------------------------------------------- counterexample

double exp_counterexample_logtail(double t, double a_n, double s_n) {
  if (!(t > 0.0)) throw std::invalid_argument("exp_counterexample_logtail: t must be positive");
  return -a_n - t * std::sqrt(a_n) * s_n;
}

json NecessityCheck::to_json() const {
  return {{"t", t},           {"n_grid", n_grid},          {"values", json_reals(values)},
          {"limsup", json_real(limsup)}, {"threshold", threshold}, {"necessity_violated", necessity_violated}};
}

NecessityCheck exp_counterexample_necessity(const TriangularArrayModel& model, const SpeedSequence& a, double t) {
  NecessityCheck c;
  c.t = t;
  c.n_grid = model.n_grid();
  c.threshold = -t * t / 8.0;
  for (long long n : c.n_grid) c.values.push_back(exp_counterexample_logtail(t, a(n), std::sqrt(model.total_variance(n))));
  const std::size_t N = c.values.size();
  if (N == 0) return c;
  const std::size_t L = N < 3 ? N : std::max<std::size_t>(3, (N + 2) / 3);
  const auto first = c.values.end() - static_cast<std::ptrdiff_t>(L);
  const bool decreasing = std::is_sorted(first, c.values.end(), std::greater<>());
  // A nonincreasing tail has its limsup at or below the last value.
  c.limsup = decreasing ? c.values.back() : *std::max_element(first, c.values.end());
  c.necessity_violated = c.limsup > c.threshold;
  return c;
}

// ----------------------------------------------------------- equivalence

EquivalenceCheck comment1_equivalence(const TriangularArrayModel& model, const SpeedSequence& a, double beta,
                                      int grid_points) {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  if (grid_points < 2) throw std::invalid_argument("grid_points must be >= 2");
  EquivalenceCheck e;
  e.beta = beta;
  e.n_grid = model.n_grid();
  const std::size_t N = e.n_grid.size();
  e.log_c1_grid.assign(N, -kInf);
  e.log_c1_upper.assign(N, -kInf);
  e.log_banded.assign(N, -kInf);
  e.log_banded_half.assign(N, -kInf);

  parallel_for(static_cast<long long>(N), [&](long long idx) {
    const auto i = static_cast<std::size_t>(idx);
    const RowContext c = context(model, a, e.n_grid[i]);
    const double ra = std::sqrt(c.a);
    const double hi = c.s / ra;
    if (c.a >= 1.0) return;  // empty band
    const double la = std::log(c.a);
    const double top = std::log(1.0 / c.a);
    std::vector<double> u(static_cast<std::size_t>(grid_points));
    for (int k = 0; k < grid_points; ++k) u[static_cast<std::size_t>(k)] = std::exp(top * k / (grid_points - 1));
    u.front() = 1.0;
    u.back() = 1.0 / c.a;
    std::vector<double> lt(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) {
      const Band band = Band::open(u[k] * ra * c.s, hi);
      lt[k] = band.empty() ? -kInf
                           : la + log_group_sum(c.groups, [&](const EntryLaw& law) { return law.log_prob(band).value; });
    }
    double grid_sup = -kInf, upper = -kInf;
    for (std::size_t k = 0; k < u.size(); ++k) {
      grid_sup = std::max(grid_sup, lt[k] + beta * u[k]);
      if (k + 1 < u.size()) upper = std::max(upper, lt[k] + beta * u[k + 1]);
    }
    e.log_c1_grid[i] = grid_sup;
    e.log_c1_upper[i] = upper;
    const Band band = Band::open(ra * c.s, hi);
    auto banded = [&](double b) {
      return la + log_group_sum(c.groups, [&](const EntryLaw& law) {
               return law.log_exp_moment(b / (ra * c.s), band).value;
             });
    };
    e.log_banded[i] = banded(beta);
    e.log_banded_half[i] = banded(beta / 2.0);
  });

  auto le = [](double x, double y) {
    if (x == -kInf) return true;
    return x <= y + 1e-9 * std::max(1.0, std::abs(y));
  };
  for (std::size_t i = 0; i < N; ++i) {
    e.forward = e.forward && le(e.log_c1_grid[i], e.log_banded[i]);
    e.backward = e.backward && le(e.log_banded_half[i], std::log(2.0) + e.log_c1_upper[i] - beta / 2.0);
  }
  return e;
}

}  // namespace mdplab
