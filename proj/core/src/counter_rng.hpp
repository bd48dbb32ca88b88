#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace roughflow::detail {

// Counter-based generator: every variate is a pure function of its key, so
// paths can be generated in any order and refined without re-drawing.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_key(std::uint64_t seed, std::uint64_t stream, std::uint64_t level, std::uint64_t index) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ stream);
  h = splitmix64(h ^ (level * 0xD1B54A32D192ED03ull));
  h = splitmix64(h ^ index);
  return h;
}

// Uniform on the open interval (0,1).
inline double unit_open(std::uint64_t h) { return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53; }

inline double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t level, std::uint64_t index) {
  return unit_open(splitmix64(hash_key(seed, stream, level, index) ^ 0x5851F42D4C957F2Dull));
}

inline double normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t level, std::uint64_t index) {
  const std::uint64_t h = hash_key(seed, stream, level, index);
  const double u1 = unit_open(splitmix64(h ^ 0x1ull));
  const double u2 = unit_open(splitmix64(h ^ 0x2ull));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline std::uint64_t stream_id(std::uint64_t tag, std::uint64_t coord) { return (tag << 32) | coord; }

enum Tag : std::uint64_t {
  kBrownianSkeleton = 1,
  kBrownianBridge = 2,
  kBrownianStep = 3,
  kFbm = 4,
  kLevyArrival = 5,
  kLevySize = 6,
  kLevyBridge = 7,
};

}  // namespace roughflow::detail
