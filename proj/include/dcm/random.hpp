#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace dcm {

/// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based standard normal: a pure function of (seed, stream, index).
class CounterNormal {
 public:
  explicit CounterNormal(std::uint64_t seed) : seed_(seed) {}

  double operator()(std::uint64_t stream, std::uint64_t index) const {
    // Box-Muller on the pair slot index/2; even and odd indices take cos/sin.
    const std::uint64_t pair = index >> 1;
    const std::uint64_t key = mix64(mix64(seed_ ^ mix64(stream)) ^ pair);
    const double u1 = uniform(key);
    const double u2 = uniform(mix64(key));
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return (index & 1) ? radius * std::sin(angle) : radius * std::cos(angle);
  }

 private:
  // Uniform in (0, 1].
  static double uniform(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
  }

  std::uint64_t seed_;
};

}  // namespace dcm
