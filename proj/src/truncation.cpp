#include "mdplab/truncation.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "mdplab/numeric.hpp"

namespace mdplab {

namespace {

Band low_band(double lower) { return Band::at_most(lower); }
Band mid_band(double lower, double upper) { return {lower, false, upper, true}; }
Band high_band(double upper) { return Band::above(upper); }

void check_speed(double a_n) {
  if (!(a_n > 0.0)) throw std::invalid_argument("truncation: a_n must be positive");
  if (std::sqrt(a_n) >= 1.0) throw std::invalid_argument("truncation: sqrt(a_n) >= 1 makes the bands degenerate");
}

}  // namespace

TruncatedRow truncate_row(const RowSample& row, const TriangularArrayModel& model, double a_n) {
  check_speed(a_n);
  const RowMoments rm = row_moments(model, row.n);
  const double s = std::sqrt(rm.total);
  TruncatedRow t;
  t.lower = std::sqrt(a_n) * s;
  t.upper = s / std::sqrt(a_n);
  const RowPlan plan = model.plan(row.n);
  if (plan.entries.size() != row.values.size()) throw std::invalid_argument("truncate_row: row length differs from k_n");

  std::map<const EntryLaw*, std::array<double, 3>> cache;
  for (std::size_t j = 0; j < row.values.size(); ++j) {
    const EntryLaw* law = plan.entries[j];
    auto it = cache.find(law);
    if (it == cache.end()) {
      const Estimate lo = law->moment(low_band(t.lower), 1);
      const Estimate mi = law->moment(mid_band(t.lower, t.upper), 1);
      const Estimate hi = law->moment(high_band(t.upper), 1);
      t.centers_exact = t.centers_exact && lo.exact && mi.exact && hi.exact;
      t.max_center_se = std::max({t.max_center_se, lo.se, mi.se, hi.se});
      it = cache.emplace(law, std::array<double, 3>{lo.value, mi.value, hi.value}).first;
    }
    const auto& c = it->second;
    const double x = row.values[j];
    const double m = std::abs(x);
    t.low.push_back((m <= t.lower ? x : 0.0) - c[0]);
    t.mid.push_back((m > t.lower && m <= t.upper ? x : 0.0) - c[1]);
    t.high.push_back((m > t.upper ? x : 0.0) - c[2]);
    t.centers.push_back(c);
  }
  return t;
}

ResidualBound residual_bound(const TriangularArrayModel& model, double a_n, long long n) {
  check_speed(a_n);
  const double s = std::sqrt(model.total_variance(n));
  if (!(s > 0.0)) throw std::domain_error("zero total variance");
  ResidualBound r;
  r.bound = a_n;
  CompensatedSum sum;
  double var = 0.0;
  for (const auto& g : model.row_laws(n)) {
    const Estimate e = g.law->abs_moment(high_band(s / std::sqrt(a_n)), 1.0);
    sum.add(static_cast<double>(g.count) * e.value);
    var += std::pow(static_cast<double>(g.count) * e.se, 2);
    r.exact = r.exact && e.exact;
  }
  r.empirical = std::sqrt(a_n) / s * sum.value();
  r.empirical_se = std::sqrt(a_n) / s * std::sqrt(var);
  return r;
}

VarianceSplit variance_split(const EntryLaw& law, double lower, double upper) {
  const Band bands[3] = {low_band(lower), mid_band(lower, upper), high_band(upper)};
  double m1[3], m2[3];
  VarianceSplit v;
  for (int b = 0; b < 3; ++b) {
    const Estimate e1 = law.moment(bands[b], 1);
    const Estimate e2 = law.moment(bands[b], 2);
    m1[b] = e1.value;
    m2[b] = e2.value;
    v.exact = v.exact && e1.exact && e2.exact;
    v.se = std::max({v.se, e1.se, e2.se});
  }
  // The indicators are disjoint, so E[part_a part_b] = 0 for a != b.
  v.var_low = m2[0] - m1[0] * m1[0];
  v.var_mid = m2[1] - m1[1] * m1[1];
  v.var_high = m2[2] - m1[2] * m1[2];
  v.cov_lm = -m1[0] * m1[1];
  v.cov_lh = -m1[0] * m1[2];
  v.cov_mh = -m1[1] * m1[2];
  return v;
}

double outer_variance_ratio(const TriangularArrayModel& model, double a_n, long long n) {
  check_speed(a_n);
  const double s2 = model.total_variance(n);
  if (!(s2 > 0.0)) throw std::domain_error("zero total variance");
  const double s = std::sqrt(s2);
  const Band outer = Band::above(std::sqrt(a_n) * s);
  CompensatedSum sum;
  for (const auto& g : model.row_laws(n)) {
    const double m1 = g.law->moment(outer, 1).value;
    const double m2 = g.law->moment(outer, 2).value;
    sum.add(static_cast<double>(g.count) * (m2 - m1 * m1));
  }
  return sum.value() / s2;
}

}  // namespace mdplab
