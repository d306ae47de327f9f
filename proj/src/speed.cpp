#include "mdplab/speed.hpp"

#include "json.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mdplab {

SpeedSequence SpeedSequence::power(double gamma, double scale) {
  if (!(gamma > 0.0)) throw std::invalid_argument("speed: gamma must be positive");
  if (!(scale > 0.0)) throw std::invalid_argument("speed: scale must be positive");
  SpeedSequence s;
  s.form_ = Form::power;
  s.gamma_ = gamma;
  s.scale_ = scale;
  return s;
}

SpeedSequence SpeedSequence::constant(double value) {
  if (!(value > 0.0)) throw std::invalid_argument("speed: value must be positive");
  SpeedSequence s;
  s.form_ = Form::constant;
  s.scale_ = value;
  return s;
}

SpeedSequence SpeedSequence::table(std::map<long long, double> values) {
  if (values.empty()) throw std::invalid_argument("speed: empty table");
  for (const auto& [n, a] : values)
    if (!(a > 0.0)) throw std::invalid_argument("speed: a_" + std::to_string(n) + " must be positive");
  SpeedSequence s;
  s.form_ = Form::table;
  s.table_ = std::move(values);
  return s;
}

SpeedSequence SpeedSequence::from_json(const nlohmann::json& j) {
  const std::string form = j.at("form").get<std::string>();
  if (form == "power") return power(j.at("gamma").get<double>(), j.value("scale", 1.0));
  if (form == "constant") return constant(j.at("value").get<double>());
  if (form == "table") {
    std::map<long long, double> values;
    for (const auto& [key, v] : j.at("values").items()) values[std::stoll(key)] = v.get<double>();
    return table(std::move(values));
  }
  throw std::invalid_argument("speed: unknown form '" + form + "'");
}

double SpeedSequence::operator()(long long n) const {
  switch (form_) {
    case Form::power: return scale_ * std::pow(static_cast<double>(n), -gamma_);
    case Form::constant: return scale_;
    case Form::table: {
      const auto it = table_.find(n);
      if (it == table_.end())
        throw std::out_of_range("speed: no tabulated a_n for n = " + std::to_string(n));
      return it->second;
    }
  }
  return 0.0;
}

nlohmann::json SpeedSequence::to_json() const {
  switch (form_) {
    case Form::power: return {{"form", "power"}, {"gamma", gamma_}, {"scale", scale_}};
    case Form::constant: return {{"form", "constant"}, {"value", scale_}};
    case Form::table: {
      nlohmann::json values = nlohmann::json::object();
      for (const auto& [n, a] : table_) values[std::to_string(n)] = a;
      return {{"form", "table"}, {"values", values}};
    }
  }
  return {};
}

void SpeedSequence::validate(std::span<const long long> grid, long long n0) const {
  double prev = 0.0;
  bool have_prev = false;
  for (long long n : grid) {
    const double a = (*this)(n);
    if (!(a > 0.0)) throw std::invalid_argument("speed: a_n must be positive at n = " + std::to_string(n));
    if (form_ != Form::constant && n > n0) {
      if (have_prev && !(a < prev))
        throw std::invalid_argument("speed: a_n must decrease strictly beyond n0 (n = " +
                                    std::to_string(n) + ")");
      prev = a;
      have_prev = true;
    }
  }
}

}  // namespace mdplab
