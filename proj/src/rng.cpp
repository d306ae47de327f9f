#include "mdplab/rng.hpp"

#include <cmath>
#include <numbers>

namespace mdplab {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_key(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(master + 0x9E3779B97F4A7C15ULL);
  for (std::uint64_t c : path) h = mix64(h ^ mix64(c + 0xD1B54A32D192ED03ULL));
  return h;
}

double uniform01(Stream& rng) {
  // 53 random bits, shifted off zero.
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double standard_normal(Stream& rng) {
  const double u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double standard_exponential(Stream& rng) { return -std::log(uniform01(rng)); }

}  // namespace mdplab
