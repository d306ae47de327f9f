#pragma once

#include <map>
#include <span>
#include <string>

#include "json.hpp"

namespace mdplab {

/// Moderate-deviation speed a_n > 0, a_n -> 0.
class SpeedSequence {
 public:
  enum class Form { power, constant, table };

  /// a_n = scale * n^{-gamma}.
  static SpeedSequence power(double gamma, double scale = 1.0);
  /// a_n = value for every n (used to probe one speed at a time).
  static SpeedSequence constant(double value);
  static SpeedSequence table(std::map<long long, double> values);
  static SpeedSequence from_json(const nlohmann::json& j);

  [[nodiscard]] double operator()(long long n) const;
  [[nodiscard]] Form form() const { return form_; }
  [[nodiscard]] nlohmann::json to_json() const;

  /// Checks a_n > 0 on the grid and strict decrease beyond n0 (ignored for
  /// the constant form). Throws std::invalid_argument on violation.
  void validate(std::span<const long long> grid, long long n0 = 0) const;

 private:
  Form form_ = Form::power;
  double gamma_ = 0.5;
  double scale_ = 1.0;
  std::map<long long, double> table_;
};

}  // namespace mdplab
