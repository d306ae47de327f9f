#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mdplab/array_models.hpp"
#include "mdplab/paths_rates.hpp"
#include "mdplab/speed.hpp"

namespace mdplab {

struct MCConfig {
  long long per_batch = 10000;
  long long batches = 10;
  std::uint64_t seed = 1;
  double z = 3.0;  // confidence multiplier

  [[nodiscard]] long long total() const { return per_batch * batches; }
  void validate() const;
  static MCConfig from_json(const nlohmann::json& j, std::uint64_t seed);
};

/// Event on the step path W_n. In MDP scale the level applies to
/// sqrt(a_n) W_n; in raw scale it applies to the partial sums themselves.
struct McEvent {
  PathEvent::Kind kind = PathEvent::Kind::endpoint;
  double level = 0.0;
  double t1 = 0.0, t2 = 1.0;
  bool raw = false;

  static McEvent endpoint(double t) { return {PathEvent::Kind::endpoint, t, 0.0, 1.0, false}; }
  static McEvent endpoint_raw(double level) { return {PathEvent::Kind::endpoint, level, 0.0, 1.0, true}; }
  static McEvent from_path_event(const PathEvent& e) { return {e.kind, e.lambda, e.t1, e.t2, false}; }
};

enum class Method { exact, tilted, crude };
std::string to_string(Method m);

struct TailEstimate {
  double p_hat = 0.0;
  double log_p = 0.0;  // log p_hat, kept separately because p_hat may underflow
  double se = 0.0;
  double log_scaled = 0.0;  // a_n log p_hat
  double ci_lo = 0.0, ci_hi = 0.0;
  Method method = Method::crude;
  double ess = 0.0;
  long long samples = 0;
  long long hits = 0;
  bool zero_hits = false;  // log_scaled is -inf; ci_hi is the rule-of-three bound 3/N

  [[nodiscard]] double relative_se() const { return p_hat > 0.0 ? se / p_hat : kInf; }
  [[nodiscard]] nlohmann::json to_json() const;
};

struct TiltPlan {
  long long n = 0;
  double theta = 0.0;
  double log_normalizer = 0.0;  // sum_j psi_j(theta)
  double target = 0.0;
  double residual = 0.0;
  RowPlan row;
};

/// Solves sum_j psi_j'(theta) = target (raw sum scale) by Newton steps
/// safeguarded with bisection; |residual| <= 1e-8 max(1, |target|).
TiltPlan tilt_solve(const TriangularArrayModel& model, long long n, double target);
/// The untilted plan (theta = 0): estimates under it equal crude ones bit for bit.
TiltPlan null_tilt(const TriangularArrayModel& model, long long n);

TailEstimate crude_tail(const TriangularArrayModel& model, const SpeedSequence& a, const McEvent& event, long long n,
                        const MCConfig& cfg);
/// Single-threaded reference implementation of crude_tail.
TailEstimate crude_tail_serial(const TriangularArrayModel& model, const SpeedSequence& a, const McEvent& event,
                               long long n, const MCConfig& cfg);

/// Mean of exp(-theta S + sum psi(theta)) 1{event} under the tilted row law.
TailEstimate is_tail(const TriangularArrayModel& model, const SpeedSequence& a, const McEvent& event, long long n,
                     const TiltPlan& plan, const MCConfig& cfg);

struct CurveRow {
  long long n = 0;
  double a_n = 0.0;
  double t = 0.0;
  TailEstimate estimate;
  double rate = 0.0;  // inf of the rate function over the event (t^2/2 for endpoint events)
  double gap = 0.0;   // log_scaled + rate
};

enum class CurveMethod { automatic, exact, tilted, crude };
CurveMethod parse_curve_method(const std::string& tag);

/// Per (n, t): exact Gaussian row sums first, then tilted importance
/// sampling when every entry has a cumulant generating function, crude
/// sampling otherwise (for `automatic`).
std::vector<CurveRow> mdp_curve(const TriangularArrayModel& model, const SpeedSequence& a,
                                std::span<const double> t_grid, std::span<const long long> n_grid,
                                const MCConfig& cfg, CurveMethod method = CurveMethod::automatic,
                                PathEvent::Kind kind = PathEvent::Kind::endpoint, double t1 = 0.0, double t2 = 1.0);

/// True when the row sum is exactly Gaussian.
bool gaussian_row_sum(const TriangularArrayModel& model);

}  // namespace mdplab
