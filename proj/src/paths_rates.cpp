#include "mdplab/paths_rates.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "mdplab/numeric.hpp"

namespace mdplab {

using nlohmann::json;

void PiecewisePath::validate() const {
  if (knots.size() < 2) throw std::invalid_argument("path: need at least two knots");
  if (values.size() != knots.size()) throw std::invalid_argument("path: values and knots differ in length");
  if (knots.front() != 0.0) throw std::invalid_argument("path: first knot must be 0");
  if (knots.back() != 1.0) throw std::invalid_argument("path: last knot must be 1");
  for (std::size_t i = 1; i < knots.size(); ++i)
    if (!(knots[i] > knots[i - 1])) throw std::invalid_argument("path: knots must be strictly increasing");
}

double PiecewisePath::operator()(double t) const {
  if (t <= knots.front()) return scale * values.front();
  if (t >= knots.back()) return scale * values.back();
  const auto it = std::upper_bound(knots.begin(), knots.end(), t);
  const auto i = static_cast<std::size_t>(it - knots.begin()) - 1;
  if (kind == Kind::step) return scale * values[i];
  const double w = (t - knots[i]) / (knots[i + 1] - knots[i]);
  return scale * (values[i] + w * (values[i + 1] - values[i]));
}

double PiecewisePath::sup() const {
  return scale * (scale >= 0.0 ? *std::max_element(values.begin(), values.end())
                               : *std::min_element(values.begin(), values.end()));
}

PiecewisePath PiecewisePath::from_json(const json& j) {
  PiecewisePath p;
  const std::string kind = j.value("kind", std::string("linear"));
  if (kind == "step") p.kind = Kind::step;
  else if (kind == "linear") p.kind = Kind::linear;
  else throw std::invalid_argument("path: unknown kind '" + kind + "'");
  p.knots = j.at("knots").get<std::vector<double>>();
  p.values = j.at("values").get<std::vector<double>>();
  p.scale = j.value("scale", 1.0);
  p.validate();
  return p;
}

json PiecewisePath::to_json() const {
  json j = {{"kind", kind == Kind::step ? "step" : "linear"}, {"knots", knots}, {"values", values}};
  if (scale != 1.0) j["scale"] = scale;
  return j;
}

PiecewisePath donsker_path(std::span<const double> row, std::span<const double> partials,
                           PiecewisePath::Kind kind) {
  if (row.size() != partials.size()) throw std::invalid_argument("donsker_path: row and partials differ in length");
  if (row.empty() || !(partials.back() > 0.0)) throw std::domain_error("zero total variance");
  const double total = partials.back();
  const double s = std::sqrt(total);
  PiecewisePath p;
  p.kind = kind;
  p.knots.push_back(0.0);
  p.values.push_back(0.0);
  CompensatedSum sum;
  double prev = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    sum.add(row[i]);
    if (partials[i] < prev) throw std::invalid_argument("donsker_path: partial variances must be nondecreasing");
    if (partials[i] > prev) {
      p.knots.push_back(partials[i] == total ? 1.0 : partials[i] / total);
      p.values.push_back(sum.value() / s);
      prev = partials[i];
    }
  }
  p.values.back() = sum.value() / s;
  return p;
}

double rate_I(const PiecewisePath& path) {
  path.validate();
  if (path.scale * path.values.front() != 0.0) return kInf;
  if (path.kind == PiecewisePath::Kind::step) {
    if (path.scale == 0.0) return 0.0;
    for (std::size_t i = 1; i < path.values.size(); ++i)
      if (path.values[i] != path.values[i - 1]) return kInf;
    return 0.0;
  }
  CompensatedSum s;
  for (std::size_t i = 1; i < path.knots.size(); ++i) {
    const double dv = path.values[i] - path.values[i - 1];
    s.add(dv * dv / (path.knots[i] - path.knots[i - 1]));
  }
  return 0.5 * path.scale * path.scale * s.value();
}

double rate_Im(const RatePartition& partition, RateForm form) {
  const auto& t = partition.times;
  const auto& u = partition.levels;
  if (t.empty()) throw std::invalid_argument("rate_Im: need m >= 1");
  if (t.size() != u.size()) throw std::invalid_argument("rate_Im: times and levels differ in length");
  double prev_t = 0.0, prev_u = 0.0;
  CompensatedSum s;
  for (std::size_t l = 0; l < t.size(); ++l) {
    if (t[l] < prev_t || t[l] > 1.0) throw std::invalid_argument("rate_Im: times must be sorted in [0, 1]");
    const double du = form == RateForm::levels ? u[l] - prev_u : u[l];
    const double dt = t[l] - prev_t;
    if (dt == 0.0) {
      if (du != 0.0) return kInf;
    } else {
      s.add(0.5 * du * du / dt);
    }
    prev_t = t[l];
    prev_u = u[l];
  }
  return s.value();
}

PathEvent::Kind PathEvent::parse_kind(const std::string& tag) {
  if (tag == "endpoint") return Kind::endpoint;
  if (tag == "sup") return Kind::sup;
  if (tag == "increment") return Kind::increment;
  throw std::invalid_argument("unknown event kind '" + tag + "'");
}

PathEvent PathEvent::from_json(const json& j) {
  PathEvent e;
  e.kind = parse_kind(j.at("kind").get<std::string>());
  e.lambda = j.at("lambda").get<double>();
  if (e.kind == Kind::increment) {
    e.t1 = j.at("t1").get<double>();
    e.t2 = j.at("t2").get<double>();
  }
  return e;
}

namespace {

constexpr double kGridTol = 1e-10;
constexpr int kMaxIterations = 200000;

// Projected gradient on f(v) = (N/2)|v|^2 (the discretized rate in the
// increment parametrization v_i = z(i/N) - z((i-1)/N)), step 1/(2N).
std::vector<double> projected_gradient(int N, const std::function<void(std::vector<double>&)>& project) {
  std::vector<double> v(static_cast<std::size_t>(N), 0.0);
  project(v);
  for (int it = 0; it < kMaxIterations; ++it) {
    std::vector<double> next(v);
    for (double& x : next) x *= 0.5;
    project(next);
    double delta = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) delta = std::max(delta, std::abs(next[i] - v[i]));
    v.swap(next);
    if (delta < kGridTol) break;
  }
  return v;
}

double grid_rate(const std::vector<double>& v) {
  CompensatedSum s;
  for (double x : v) s.add(x * x);
  return 0.5 * static_cast<double>(v.size()) * s.value();
}

// Projection onto {v : sum_{i in [lo, hi)} v_i >= lambda}.
void project_halfspace(std::vector<double>& v, std::size_t lo, std::size_t hi, double lambda) {
  double s = 0.0;
  for (std::size_t i = lo; i < hi; ++i) s += v[i];
  if (s >= lambda) return;
  const double shift = (lambda - s) / static_cast<double>(hi - lo);
  for (std::size_t i = lo; i < hi; ++i) v[i] += shift;
}

PiecewisePath grid_path(const std::vector<double>& v) {
  PiecewisePath p;
  p.kind = PiecewisePath::Kind::linear;
  const auto N = v.size();
  p.knots.resize(N + 1);
  p.values.resize(N + 1);
  double z = 0.0;
  for (std::size_t i = 0; i <= N; ++i) {
    p.knots[i] = static_cast<double>(i) / static_cast<double>(N);
    if (i > 0) z += v[i - 1];
    p.values[i] = z;
  }
  p.knots.back() = 1.0;
  return p;
}

}  // namespace

EventInfimum rate_event_infimum(const PathEvent& event, int grid_size) {
  if (grid_size < 2) throw std::invalid_argument("rate_event_infimum: grid_size must be >= 2");
  const int N = grid_size;
  const double lam = event.lambda;
  EventInfimum out;
  std::vector<double> best;

  switch (event.kind) {
    case PathEvent::Kind::endpoint: {
      out.closed_form = lam > 0.0 ? 0.5 * lam * lam : 0.0;
      best = projected_gradient(N, [&](std::vector<double>& v) { project_halfspace(v, 0, v.size(), lam); });
      break;
    }
    case PathEvent::Kind::sup: {
      out.closed_form = lam > 0.0 ? 0.5 * lam * lam : 0.0;
      // sup_t z(t) >= lambda is the union over grid times j/N of {z(j/N) >= lambda}.
      double best_value = kInf;
      for (int j = 1; j <= N; ++j) {
        auto v = projected_gradient(N, [&](std::vector<double>& w) {
          project_halfspace(w, 0, static_cast<std::size_t>(j), lam);
        });
        const double r = grid_rate(v);
        if (r < best_value) {
          best_value = r;
          best = std::move(v);
        }
      }
      break;
    }
    case PathEvent::Kind::increment: {
      if (!(event.t1 >= 0.0 && event.t1 < event.t2 && event.t2 <= 1.0))
        throw std::invalid_argument("increment event needs 0 <= t1 < t2 <= 1");
      out.closed_form = lam > 0.0 ? 0.5 * lam * lam / (event.t2 - event.t1) : 0.0;
      // Cells lying inside [t1, t2].
      const auto lo = static_cast<std::size_t>(std::ceil(event.t1 * N - 1e-9));
      const auto hi = static_cast<std::size_t>(std::floor(event.t2 * N + 1e-9));
      if (hi <= lo) throw std::invalid_argument("increment window narrower than one grid cell");
      best = projected_gradient(N, [&](std::vector<double>& v) { project_halfspace(v, lo, hi, lam); });
      break;
    }
  }
  out.grid_value = grid_rate(best);
  out.minimizer = grid_path(best);
  return out;
}

double constrained_grid_rate(const RatePartition& partition, int grid_size) {
  if (grid_size < 2) throw std::invalid_argument("constrained_grid_rate: grid_size must be >= 2");
  const auto& t = partition.times;
  const auto& u = partition.levels;
  if (t.empty() || t.size() != u.size()) throw std::invalid_argument("constrained_grid_rate: bad partition");
  const int N = grid_size;
  // Window l covers cells [idx_{l-1}, idx_l) and must sum to u_l - u_{l-1}.
  std::vector<std::size_t> idx;
  std::vector<double> target;
  std::size_t prev_idx = 0;
  double prev_u = 0.0;
  for (std::size_t l = 0; l < t.size(); ++l) {
    const auto i = static_cast<std::size_t>(std::llround(t[l] * N));
    if (i < prev_idx) throw std::invalid_argument("constrained_grid_rate: times must be sorted");
    if (i == prev_idx) {
      if (u[l] != prev_u) return kInf;
      continue;
    }
    idx.push_back(i);
    target.push_back(u[l] - prev_u);
    prev_idx = i;
    prev_u = u[l];
  }
  auto project = [&](std::vector<double>& v) {
    std::size_t lo = 0;
    for (std::size_t w = 0; w < idx.size(); ++w) {
      double s = 0.0;
      for (std::size_t i = lo; i < idx[w]; ++i) s += v[i];
      const double shift = (target[w] - s) / static_cast<double>(idx[w] - lo);
      for (std::size_t i = lo; i < idx[w]; ++i) v[i] += shift;
      lo = idx[w];
    }
  };
  return grid_rate(projected_gradient(N, project));
}

double kernel_rate(double value, double fx, double k2) {
  const double d = fx * k2;
  if (!(d > 0.0)) throw std::invalid_argument("kernel_rate: f(x) int K^2 must be positive");
  return value / d;
}

}  // namespace mdplab
