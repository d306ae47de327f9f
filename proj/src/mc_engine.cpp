#include "mdplab/mc_engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mdplab/json_util.hpp"
#include "mdplab/numeric.hpp"
#include "mdplab/rng.hpp"

namespace mdplab {

using nlohmann::json;

void MCConfig::validate() const {
  if (per_batch < 1 || batches < 1) throw std::invalid_argument("mc: sample counts must be positive");
  if (total() < 2) throw std::invalid_argument("mc: need at least two samples");
  if (!(z > 0.0)) throw std::invalid_argument("mc: confidence multiplier must be positive");
}

MCConfig MCConfig::from_json(const json& j, std::uint64_t seed) {
  MCConfig c;
  c.per_batch = j.value("per_batch", c.per_batch);
  c.batches = j.value("batches", c.batches);
  c.z = j.value("z", c.z);
  c.seed = seed;
  c.validate();
  return c;
}

std::string to_string(Method m) {
  switch (m) {
    case Method::exact: return "exact";
    case Method::tilted: return "tilted";
    case Method::crude: return "crude";
  }
  return "?";
}

json TailEstimate::to_json() const {
  return {{"p_hat", json_real(p_hat)},
          {"log_p", json_real(log_p)},
          {"se", json_real(se)},
          {"log_scaled", json_real(log_scaled)},
          {"ci", {json_real(ci_lo), json_real(ci_hi)}},
          {"method", to_string(method)},
          {"ess", json_real(ess)},
          {"samples", samples},
          {"hits", hits},
          {"zero_hits", zero_hits}};
}

// ------------------------------------------------------------------ tilting

namespace {

struct CumulantSum {
  const RowPlan& row;
  double operator()(double theta) const {  // sum psi
    CompensatedSum s;
    for (const auto& g : row.groups) s.add(static_cast<double>(g.count) * g.law->log_mgf(theta));
    return s.value();
  }
  double d1(double theta) const {
    CompensatedSum s;
    for (const auto& g : row.groups) s.add(static_cast<double>(g.count) * g.law->dlog_mgf(theta));
    return s.value();
  }
  double d2(double theta) const {
    CompensatedSum s;
    for (const auto& g : row.groups) s.add(static_cast<double>(g.count) * g.law->d2log_mgf(theta));
    return s.value();
  }
};

}  // namespace

TiltPlan null_tilt(const TriangularArrayModel& model, long long n) {
  TiltPlan p;
  p.n = n;
  p.row = model.plan(n);
  return p;
}

TiltPlan tilt_solve(const TriangularArrayModel& model, long long n, double target) {
  TiltPlan p = null_tilt(model, n);
  p.target = target;
  double dom_lo = -kInf, dom_hi = kInf;
  for (const auto& g : p.row.groups) {
    if (!g.law->has_mgf() || !g.law->can_tilt())
      throw UnavailableError("tilt_solve: " + g.law->describe() + " has no usable cumulant generating function");
    const auto [lo, hi] = g.law->mgf_domain();
    dom_lo = std::max(dom_lo, lo);
    dom_hi = std::min(dom_hi, hi);
  }
  const CumulantSum psi{p.row};
  const double tol = 1e-8 * std::max(1.0, std::abs(target));
  auto f = [&](double th) { return psi.d1(th) - target; };

  double theta = 0.0;
  double fv = f(theta);
  if (std::abs(fv) > tol) {
    // Bracket the root; f is increasing in theta.
    const double dir = fv < 0.0 ? 1.0 : -1.0;
    const double edge = dir > 0.0 ? dom_hi : dom_lo;
    double inner = 0.0;
    double step = 1.0 / std::sqrt(std::max(psi.d2(0.0), 1e-300));
    double outer = dir * step;
    bool found = false;
    for (int i = 0; i < 400 && !found; ++i) {
      if (std::isfinite(edge) && dir * (outer - edge) >= 0.0) outer = 0.5 * (inner + edge);
      const double fo = f(outer);
      if (dir * fo >= 0.0) {
        found = true;
      } else {
        inner = outer;
        outer = std::isfinite(edge) ? 0.5 * (outer + edge) : outer * 2.0;
        if (!std::isfinite(edge) && std::abs(outer) > 1e300) break;
      }
    }
    if (!found) throw std::domain_error("tilt_solve: target unattainable within the mgf domain");
    double lo = std::min(inner, outer), hi = std::max(inner, outer);
    theta = 0.5 * (lo + hi);
    for (int it = 0; it < 500; ++it) {
      fv = f(theta);
      if (std::abs(fv) <= tol) break;
      if (fv < 0.0) lo = theta;
      else hi = theta;
      const double slope = psi.d2(theta);
      double next = slope > 0.0 ? theta - fv / slope : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (next == theta) break;
      theta = next;
    }
    fv = f(theta);
    if (std::abs(fv) > tol) throw std::runtime_error("tilt_solve: no convergence (residual " + std::to_string(fv) + ")");
  }
  p.theta = theta;
  p.residual = fv;
  p.log_normalizer = theta == 0.0 ? 0.0 : psi(theta);
  return p;
}

// ----------------------------------------------------------- accumulation

namespace {

struct Geometry {
  PathEvent::Kind kind;
  double threshold;       // raw-sum threshold
  std::size_t m1 = 0;     // increment window: S_{m2} - S_{m1}
  std::size_t m2 = 0;
};

Geometry geometry(const RowPlan& row, double a_n, const McEvent& ev) {
  CompensatedSum tot;
  std::vector<double> partial;
  for (const EntryLaw* law : row.entries) {
    tot.add(law->variance());
    partial.push_back(tot.value());
  }
  const double s2 = tot.value();
  if (!(s2 > 0.0)) throw std::domain_error("zero total variance");
  Geometry g{ev.kind, ev.raw ? ev.level : ev.level * std::sqrt(s2) / std::sqrt(a_n)};
  if (ev.kind == PathEvent::Kind::increment) {
    if (!(ev.t1 >= 0.0 && ev.t1 < ev.t2 && ev.t2 <= 1.0))
      throw std::invalid_argument("increment event needs 0 <= t1 < t2 <= 1");
    // W(t) = S_m / s with m = #{i : s^2_i <= t s^2}.
    auto count = [&](double t) {
      const double x = t * s2 * (1.0 + 1e-12);
      return static_cast<std::size_t>(std::upper_bound(partial.begin(), partial.end(), x) - partial.begin());
    };
    g.m1 = count(ev.t1);
    g.m2 = ev.t2 == 1.0 ? partial.size() : count(ev.t2);
  }
  return g;
}

bool occurs(const Geometry& g, std::span<const double> x, double& total) {
  switch (g.kind) {
    case PathEvent::Kind::endpoint: {
      double s = 0.0;
      for (double v : x) s += v;
      total = s;
      return s >= g.threshold;
    }
    case PathEvent::Kind::sup: {
      double s = 0.0, best = 0.0;
      for (double v : x) {
        s += v;
        best = std::max(best, s);
      }
      total = s;
      return best >= g.threshold;
    }
    case PathEvent::Kind::increment: {
      double s = 0.0, s1 = 0.0, s2 = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (i == g.m1) s1 = s;
        if (i == g.m2) s2 = s;
        s += x[i];
      }
      if (g.m1 == x.size()) s1 = s;
      if (g.m2 == x.size()) s2 = s;
      total = s;
      return s2 - s1 >= g.threshold;
    }
  }
  return false;
}

struct BatchResult {
  long long hits = 0;
  double log_w1 = -kInf;  // log sum of event weights
  double log_w2 = -kInf;  // log sum of squared event weights
  double log_a1 = -kInf;  // same over all samples (ESS)
  double log_a2 = -kInf;
};

BatchResult run_batch(const TiltPlan& tp, const Geometry& geo, const MCConfig& cfg, long long b) {
  BatchResult out;
  const bool weighted = tp.theta != 0.0;
  std::vector<double> row(tp.row.entries.size());
  std::vector<double> hit_lw, all_lw;
  if (weighted) {
    hit_lw.reserve(static_cast<std::size_t>(cfg.per_batch));
    all_lw.reserve(static_cast<std::size_t>(cfg.per_batch));
  }
  for (long long r = 0; r < cfg.per_batch; ++r) {
    const std::uint64_t key = derive_key(cfg.seed, {static_cast<std::uint64_t>(b), static_cast<std::uint64_t>(r)});
    if (weighted) sample_row_tilted(tp.row, tp.theta, key, row);
    else sample_row(tp.row, key, row);
    double total = 0.0;
    const bool hit = occurs(geo, row, total);
    if (hit) ++out.hits;
    if (weighted) {
      const double lw = -tp.theta * total + tp.log_normalizer;
      all_lw.push_back(lw);
      if (hit) hit_lw.push_back(lw);
    }
  }
  if (weighted) {
    auto sq = [](std::vector<double> v) {
      for (double& x : v) x *= 2.0;
      return v;
    };
    out.log_w1 = log_sum_exp(hit_lw);
    out.log_w2 = log_sum_exp(sq(hit_lw));
    out.log_a1 = log_sum_exp(all_lw);
    out.log_a2 = log_sum_exp(sq(all_lw));
  } else {
    const double lh = out.hits > 0 ? std::log(static_cast<double>(out.hits)) : -kInf;
    const double ln = std::log(static_cast<double>(cfg.per_batch));
    out.log_w1 = out.log_w2 = lh;
    out.log_a1 = out.log_a2 = ln;
  }
  return out;
}

TailEstimate reduce(const std::vector<BatchResult>& batches, const MCConfig& cfg, double a_n, Method method,
                    bool weighted) {
  TailEstimate e;
  e.method = method;
  e.samples = cfg.total();
  const double N = static_cast<double>(e.samples);
  const double logN = std::log(N);
  std::vector<double> w1, w2, a1, a2;
  for (const auto& b : batches) {  // ascending batch index
    e.hits += b.hits;
    w1.push_back(b.log_w1);
    w2.push_back(b.log_w2);
    a1.push_back(b.log_a1);
    a2.push_back(b.log_a2);
  }
  e.ess = std::exp(2.0 * log_sum_exp(a1) - log_sum_exp(a2));
  if (e.hits == 0) {
    e.zero_hits = true;
    e.p_hat = 0.0;
    e.log_p = -kInf;
    e.log_scaled = -kInf;
    e.ci_lo = 0.0;
    e.ci_hi = std::min(1.0, 3.0 / N);
    return e;
  }
  if (!weighted) {
    const double p = static_cast<double>(e.hits) / N;
    e.p_hat = p;
    e.log_p = std::log(p);
    e.se = std::sqrt(std::max(0.0, p * (1.0 - p)) / (N - 1.0));
  } else {
    e.log_p = log_sum_exp(w1) - logN;
    e.p_hat = std::exp(e.log_p);
    const double log_m2 = log_sum_exp(w2) - logN;
    const double log_var = log_m2 > 2.0 * e.log_p ? log_sub_exp(log_m2, 2.0 * e.log_p) + std::log(N / (N - 1.0)) : -kInf;
    e.se = std::exp(0.5 * (log_var - logN));
  }
  if (std::isnan(e.log_p)) throw std::runtime_error("importance weights produced NaN");
  e.log_scaled = a_n * e.log_p;
  e.ci_lo = std::max(0.0, e.p_hat - cfg.z * e.se);
  e.ci_hi = std::min(1.0, e.p_hat + cfg.z * e.se);
  return e;
}

TailEstimate estimate(const TiltPlan& tp, double a_n, const McEvent& ev, const MCConfig& cfg, Method method,
                      bool parallel) {
  cfg.validate();
  const Geometry geo = geometry(tp.row, a_n, ev);
  std::vector<BatchResult> batches(static_cast<std::size_t>(cfg.batches));
  if (parallel) {
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
    for (long long b = 0; b < cfg.batches; ++b) {
      try {
        batches[static_cast<std::size_t>(b)] = run_batch(tp, geo, cfg, b);
      } catch (...) {
#pragma omp critical
        error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
  } else {
    for (long long b = 0; b < cfg.batches; ++b) batches[static_cast<std::size_t>(b)] = run_batch(tp, geo, cfg, b);
  }
  return reduce(batches, cfg, a_n, method, tp.theta != 0.0);
}

}  // namespace

TailEstimate crude_tail(const TriangularArrayModel& model, const SpeedSequence& a, const McEvent& event, long long n,
                        const MCConfig& cfg) {
  return estimate(null_tilt(model, n), a(n), event, cfg, Method::crude, true);
}

TailEstimate crude_tail_serial(const TriangularArrayModel& model, const SpeedSequence& a, const McEvent& event,
                               long long n, const MCConfig& cfg) {
  return estimate(null_tilt(model, n), a(n), event, cfg, Method::crude, false);
}

TailEstimate is_tail(const TriangularArrayModel& model, const SpeedSequence& a, const McEvent& event, long long n,
                     const TiltPlan& plan, const MCConfig& cfg) {
  if (plan.n != n || static_cast<long long>(plan.row.entries.size()) != model.row_size(n))
    throw std::invalid_argument("is_tail: plan was solved for another row");
  return estimate(plan, a(n), event, cfg, Method::tilted, true);
}

// ------------------------------------------------------------------ curve

CurveMethod parse_curve_method(const std::string& tag) {
  if (tag == "auto") return CurveMethod::automatic;
  if (tag == "exact") return CurveMethod::exact;
  if (tag == "tilted") return CurveMethod::tilted;
  if (tag == "crude") return CurveMethod::crude;
  throw std::invalid_argument("unknown method '" + tag + "'");
}

bool gaussian_row_sum(const TriangularArrayModel& model) {
  const auto& in = model.innovation();
  if (!in || in->mc_only) return false;
  const bool scaled_family = model.family() == Family::iid || model.family() == Family::linear_process;
  return scaled_family && (in->kind == Innovation::Kind::gaussian);
}

namespace {

double event_rate(PathEvent::Kind kind, double t, double t1, double t2) {
  if (t <= 0.0) return 0.0;
  if (kind == PathEvent::Kind::increment) return 0.5 * t * t / (t2 - t1);
  return 0.5 * t * t;
}

bool tiltable(const RowPlan& row) {
  return std::all_of(row.groups.begin(), row.groups.end(),
                     [](const LawGroup& g) { return g.law->has_mgf() && g.law->can_tilt(); });
}

}  // namespace

std::vector<CurveRow> mdp_curve(const TriangularArrayModel& model, const SpeedSequence& a,
                                std::span<const double> t_grid, std::span<const long long> n_grid,
                                const MCConfig& cfg, CurveMethod method, PathEvent::Kind kind, double t1, double t2) {
  if (t_grid.empty() || n_grid.empty()) throw std::invalid_argument("mdp_curve: grids must be nonempty");
  std::vector<CurveRow> rows;
  for (long long n : n_grid) {
    const double an = a(n);
    const double s = std::sqrt(model.total_variance(n));
    MCConfig cell = cfg;
    cell.seed = derive_key(cfg.seed, {static_cast<std::uint64_t>(n)});
    for (double t : t_grid) {
      CurveRow row;
      row.n = n;
      row.a_n = an;
      row.t = t;
      const McEvent ev{kind, t, t1, t2, false};
      const bool exact_ok = kind == PathEvent::Kind::endpoint && gaussian_row_sum(model);
      CurveMethod use = method;
      if (use == CurveMethod::automatic) {
        if (exact_ok) use = CurveMethod::exact;
        else if (t > 0.0 && tiltable(model.plan(n))) use = CurveMethod::tilted;
        else use = CurveMethod::crude;
      }
      if (use == CurveMethod::exact) {
        if (!exact_ok) throw std::invalid_argument("mdp_curve: exact method needs Gaussian row sums and endpoint events");
        TailEstimate& e = row.estimate;
        e.method = Method::exact;
        e.log_p = log_normal_q(t / std::sqrt(an));
        e.p_hat = std::exp(e.log_p);
        e.log_scaled = an * e.log_p;
        e.ci_lo = e.ci_hi = e.p_hat;
      } else if (use == CurveMethod::tilted) {
        TiltPlan plan;
        try {
          plan = tilt_solve(model, n, t * s / std::sqrt(an));
        } catch (const std::domain_error&) {
          plan = null_tilt(model, n);  // unattainable tilt: the event is at the edge of the support
        }
        row.estimate = estimate(plan, an, ev, cell, plan.theta != 0.0 ? Method::tilted : Method::crude, true);
      } else {
        row.estimate = crude_tail(model, a, ev, n, cell);
      }
      row.rate = event_rate(kind, t, t1, t2);
      row.gap = row.estimate.log_scaled + row.rate;
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace mdplab
