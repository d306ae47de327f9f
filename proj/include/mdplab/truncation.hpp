#pragma once

#include <array>
#include <vector>

#include "mdplab/array_models.hpp"

namespace mdplab {

/// X - E X = low + mid + high with the split at |X| <= sqrt(a) s,
/// sqrt(a) s < |X| <= s / sqrt(a) and |X| > s / sqrt(a), each part centered
/// by its own expectation.
struct TruncatedRow {
  std::vector<double> low;
  std::vector<double> mid;
  std::vector<double> high;
  std::vector<std::array<double, 3>> centers;
  double lower = 0.0;  // sqrt(a_n) s_n
  double upper = 0.0;  // s_n / sqrt(a_n)
  bool centers_exact = true;
  double max_center_se = 0.0;
};

/// Throws std::invalid_argument when sqrt(a_n) >= 1.
TruncatedRow truncate_row(const RowSample& row, const TriangularArrayModel& model, double a_n);

struct ResidualBound {
  double bound = 0.0;      // a_n
  double empirical = 0.0;  // (sqrt(a_n)/s_n) sum_j E|X_nj| 1{|X_nj| > s_n / sqrt(a_n)}
  double empirical_se = 0.0;
  bool exact = true;
};

ResidualBound residual_bound(const TriangularArrayModel& model, double a_n, long long n);

/// Variances of the three parts of one entry and their pairwise
/// covariances; var_low + var_mid + var_high + 2 (cov_lm + cov_lh + cov_mh)
/// equals Var(X).
struct VarianceSplit {
  double var_low = 0.0, var_mid = 0.0, var_high = 0.0;
  double cov_lm = 0.0, cov_lh = 0.0, cov_mh = 0.0;
  double se = 0.0;
  bool exact = true;
  [[nodiscard]] double total() const {
    return var_low + var_mid + var_high + 2.0 * (cov_lm + cov_lh + cov_mh);
  }
};

VarianceSplit variance_split(const EntryLaw& law, double lower, double upper);

/// sum_j Var(mid_j + high_j) / s_n^2.
double outer_variance_ratio(const TriangularArrayModel& model, double a_n, long long n);

}  // namespace mdplab
