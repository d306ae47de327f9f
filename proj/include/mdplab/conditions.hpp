#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mdplab/array_models.hpp"
#include "mdplab/speed.hpp"

namespace mdplab {

enum class Verdict { pass, fail, inconclusive };
enum class Target { to_zero, to_minus_inf, bounded };

std::string to_string(Verdict v);
std::string to_string(Target t);

/// Finite-grid verdict for an asymptotic statement. Over the last third of
/// the grid (at least three points): a non-monotone tail is inconclusive; a
/// nonincreasing tail (of |d| for "-> 0", of d for "-> -inf") that drops by
/// at least a factor 2 and either fits a geometric decay (R^2 >= 0.9) or
/// decays at a non-decreasing pace passes; anything else fails. Bounded
/// targets pass when the whole tail sits at or below `bound`.
Verdict judge(std::span<const double> diagnostics, Target target, double bound, std::string* reason = nullptr);

struct ConditionReport {
  std::string condition_id;
  std::vector<long long> n_grid;
  std::vector<double> diagnostics;
  std::vector<double> diagnostic_se;  // 0 for exact values
  Target target = Target::to_zero;
  double bound = 1.0;  // bounded targets only
  Verdict verdict = Verdict::inconclusive;
  std::string reason;
  nlohmann::json params = nlohmann::json::object();
  std::vector<std::string> flags;
  /// Companion diagnostics of multi-part conditions; the top-level verdict
  /// is the worst of all parts.
  std::vector<ConditionReport> parts;

  [[nodiscard]] nlohmann::json to_json() const;
};

struct CoreSpec {
  enum class Kind { lindeberg, exp_banded, exp_full, tail_grid, max_neg };
  Kind kind = Kind::lindeberg;
  double epsilon = 1.0;
  double beta = 1.0;
  double c1 = 1.0;
  std::vector<double> u_grid;      // empty: 64 log-spaced points on [1, 1/a_n]
  bool extend_below_one = false;   // tail_grid: add 32 points on [epsilon, 1)

  static CoreSpec from_json(const nlohmann::json& j);
  [[nodiscard]] nlohmann::json to_json() const;
  [[nodiscard]] std::string id() const;
};

ConditionReport check_core(const TriangularArrayModel& model, const SpeedSequence& a, const CoreSpec& spec);

/// a_n sum_j P(|X_nj| > u sqrt(a_n) s_n) e^{beta u} at every u of the grid.
std::vector<double> tail_grid_profile(const TriangularArrayModel& model, long long n, double a_n, double beta,
                                      std::span<const double> u_grid);
std::vector<double> default_u_grid(double a_n, std::optional<double> extend_from = std::nullopt);

struct RegularityFns {
  std::vector<long long> knots;
  std::vector<double> f;  // s^2_n a_n
  std::vector<double> g;  // s^2_n / a_n
  std::vector<double> l;  // s^2_n / k_n
  std::vector<std::string> violations;

  [[nodiscard]] bool valid() const { return violations.empty(); }
  /// c(x) = f^{-1}(g(x)) by piecewise-linear interpolation. Sets *truncated
  /// and clamps to the last knot when x or g(x) leaves the tabulated range.
  [[nodiscard]] double c(double x, bool* truncated = nullptr) const;
  [[nodiscard]] nlohmann::json to_json() const;
};

RegularityFns build_regularity(const TriangularArrayModel& model, const SpeedSequence& a);

ConditionReport check_onecondm(const TriangularArrayModel& model, const SpeedSequence& a, const RegularityFns& rc);

enum class SufficientRoute { moment_envelope, linear_coeffs, iid };
SufficientRoute parse_route(const std::string& tag);
std::string to_string(SufficientRoute r);

/// `bound_c` is the constant of the bounded companion diagnostic of the
/// moment-envelope route; without it the diagnostic only has to stay bounded
/// (tail max within a factor 2 of the tail start).
ConditionReport check_sufficient(const TriangularArrayModel& model, const SpeedSequence& a, SufficientRoute route,
                                 std::optional<double> bound_c = std::nullopt);

/// a_n log P(sqrt(a_n)/s_n (X_0 - 1) >= t) = -a_n - t sqrt(a_n) s_n.
double exp_counterexample_logtail(double t, double a_n, double s_n);

struct NecessityCheck {
  double t = 0.0;
  std::vector<long long> n_grid;
  std::vector<double> values;
  double limsup = 0.0;     // over the last third of the grid
  double threshold = 0.0;  // -t^2 / 8
  bool necessity_violated = false;

  [[nodiscard]] nlohmann::json to_json() const;
};

NecessityCheck exp_counterexample_necessity(const TriangularArrayModel& model, const SpeedSequence& a, double t);

/// Both directions of the tail-grid reformulation of the banded exponential
/// condition, per n, in log scale:
///   sup_{u >= 1} e^{beta u} a_n sum P(u sqrt(a) s < |X| < s/sqrt(a)) <= banded(beta)
///   banded(beta / 2) <= 2 C1 e^{-beta/2},  C1 the sup above (grid upper bound).
struct EquivalenceCheck {
  double beta = 1.0;
  std::vector<long long> n_grid;
  std::vector<double> log_c1_grid;     // grid sup (lower estimate)
  std::vector<double> log_c1_upper;    // grid upper bound of the sup
  std::vector<double> log_banded;      // log exp_banded(beta)
  std::vector<double> log_banded_half; // log exp_banded(beta / 2)
  bool forward = true;
  bool backward = true;
};

EquivalenceCheck comment1_equivalence(const TriangularArrayModel& model, const SpeedSequence& a, double beta,
                                      int grid_points = 256);

}  // namespace mdplab
