#pragma once

#include <cmath>
#include <span>
#include <string>

#include "json.hpp"

namespace mdplab {

/// JSON has no infinities; non-finite reals are written as "inf", "-inf", "nan".
inline nlohmann::json json_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

inline nlohmann::json json_reals(std::span<const double> xs) {
  nlohmann::json a = nlohmann::json::array();
  for (double x : xs) a.push_back(json_real(x));
  return a;
}

/// Shortest round-trip text for CSV cells.
std::string format_real(double x);

}  // namespace mdplab
