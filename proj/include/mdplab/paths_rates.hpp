#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace mdplab {

/// Step or piecewise-linear function on [0, 1]. For step paths values[i] is
/// held on [knots[i], knots[i+1]) and the last value is W(1).
struct PiecewisePath {
  enum class Kind { step, linear };
  Kind kind = Kind::linear;
  std::vector<double> knots;
  std::vector<double> values;
  double scale = 1.0;

  /// Validates the knot layout; throws std::invalid_argument.
  void validate() const;
  [[nodiscard]] double operator()(double t) const;
  [[nodiscard]] double sup() const;

  static PiecewisePath from_json(const nlohmann::json& j);
  [[nodiscard]] nlohmann::json to_json() const;
};

/// W_n (step) or its linear interpolation from one row. `partials` are the
/// cumulative variances s^2_ni; entries with zero variance add no breakpoint.
PiecewisePath donsker_path(std::span<const double> row, std::span<const double> partials,
                           PiecewisePath::Kind kind = PiecewisePath::Kind::step);

/// 1/2 int z'^2 for absolutely continuous z with z(0) = 0, +inf otherwise.
double rate_I(const PiecewisePath& path);

struct RatePartition {
  std::vector<double> times;   // t_1 <= ... <= t_m in (0, 1]
  std::vector<double> levels;  // u_1, ..., u_m
};

enum class RateForm { levels, increments };

double rate_Im(const RatePartition& partition, RateForm form);

struct PathEvent {
  enum class Kind { endpoint, sup, increment };
  Kind kind = Kind::endpoint;
  double lambda = 1.0;
  double t1 = 0.0;  // increment window (t1, t2)
  double t2 = 1.0;

  static PathEvent from_json(const nlohmann::json& j);
  static Kind parse_kind(const std::string& tag);
};

struct EventInfimum {
  double closed_form = 0.0;
  double grid_value = 0.0;
  PiecewisePath minimizer;  // grid minimizer as a linear path
};

/// Closed-form inf of I over the event and a projected-gradient minimization
/// of 1/2 sum (dz)^2 / dt over linear paths on a uniform grid.
EventInfimum rate_event_infimum(const PathEvent& event, int grid_size);

/// Minimizes the discretized rate over linear grid paths forced through
/// (t_l, u_l); the result equals rate_Im(levels) when the times lie on the grid.
double constrained_grid_rate(const RatePartition& partition, int grid_size);

/// value / (f(x) int K^2).
double kernel_rate(double value, double fx, double k2);

}  // namespace mdplab
