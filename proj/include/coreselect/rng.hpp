#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace coreselect {

// Seeded random source with portable output. std::mt19937_64 is fully
// specified by the standard, but the standard distributions are not, so
// reports generated on different platforms would diverge. All stochastic
// code in this project draws through this wrapper instead.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound) via rejection sampling.
  std::uint64_t uniform_below(std::uint64_t bound) {
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t draw = engine_();
    while (draw >= limit) draw = engine_();
    return draw % bound;
  }

  // Standard normal via Box-Muller; one value per pair of uniforms so the
  // stream stays reproducible regardless of call pattern.
  double normal() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace coreselect
