#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace pdesgd {

// Deterministic random stream addressed by (master seed, stream index).
// Distributions are built directly on the raw 64-bit generator output, so a
// given (seed, stream) pair reproduces the same draw sequence on every
// platform and build.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
      : eng_(mix(master_seed + 0x9E3779B97F4A7C15ull * (stream_index + 1))) {}

  std::uint64_t raw() { return eng_(); }

  // uniform on [0,1) with 53 random bits
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // Box-Muller without spare caching: two uniforms per draw, fixed cost.
  double normal(double mu, double sigma) {
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 == 0.0) u1 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    return mu + sigma * r * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Rejection against the untruncated normal. The callers use bounds many
  // standard deviations wide, so the loop cap is statistically unreachable.
  double truncated_normal(double mu, double sigma, double lo, double hi) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
      double x = normal(mu, sigma);
      if (x >= lo && x <= hi) return x;
    }
    throw std::runtime_error("truncated_normal: rejection loop exceeded 1000 attempts");
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    // splitmix64 finalizer
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::mt19937_64 eng_;
};

}  // namespace pdesgd
