#pragma once

#include <cstdint>
#include <random>

#include "lufa/geom3.hpp"

namespace lufa {

// splitmix64 hash step; stateless seed-to-value mixing.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic Gaussian/uniform source. std::normal_distribution is not
// pinned across standard libraries, so Box-Muller is spelled out here; a
// given seed produces the same stream on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  Vec3 normal_vec3() {
    const double a = normal();
    const double b = normal();
    const double c = normal();
    return {a, b, c};
  }

  // Uniform direction on the unit sphere.
  Vec3 unit_vec3() {
    for (;;) {
      const Vec3 g = normal_vec3();
      const double n = norm(g);
      if (n > 1e-8) return g / n;
    }
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_{false};
  double spare_{};
};

}  // namespace lufa
