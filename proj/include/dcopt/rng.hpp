#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace dcopt {

// Seeded random source. std::mt19937_64 output is fully specified by the
// standard; the distributions below avoid std::*_distribution, whose
// sequences are implementation-defined, so traces are reproducible across
// library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // uniform in [0, 1)
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Box-Muller, two uniforms per draw
  double normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.28318530717958647692 * u2);
  }

  std::uint64_t next() { return gen_(); }

  // integer in [0, n); modulo bias is irrelevant at the sizes used here
  std::uint64_t below(std::uint64_t n) { return gen_() % n; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace dcopt
