#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace mdplab {

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t z);

/// Derives an independent stream key from a master seed and a path of
/// integer coordinates, e.g. derive_key(seed, {n, j}).
std::uint64_t derive_key(std::uint64_t master, std::initializer_list<std::uint64_t> path);

/// SplitMix64 stream. Satisfies UniformRandomBitGenerator; copying a stream
/// replays it.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(std::uint64_t key) : state_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

 private:
  std::uint64_t state_;
};

/// Uniform on the open interval (0, 1).
double uniform01(Stream& rng);
double standard_normal(Stream& rng);
double standard_exponential(Stream& rng);

}  // namespace mdplab
