#pragma once

#include <cmath>
#include <random>

#include "loopsched/common.hpp"

namespace loopsched {

inline u64 splitmix64(u64 x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Map 64 random bits to a double in [0, 1).
inline double unit_double(u64 bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

/// Seeded sample stream on top of mt19937_64 (bit-exact engine per the C++ standard).
/// Distribution transforms are implemented here rather than with std:: distributions,
/// whose output is not specified and differs between standard libraries.
class SampleStream {
 public:
  explicit SampleStream(u64 seed) : gen_(seed) {}

  double u01() { return unit_double(gen_()); }  // [0, 1)

  double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

  double normal(double mean, double stddev) {
    double u1 = 1.0 - u01();  // (0, 1]
    double u2 = u01();
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    return mean + stddev * z;
  }

  double exponential(double mean) { return -mean * std::log(1.0 - u01()); }

  /// Marsaglia-Tsang; shape boost for shape < 1.
  double gamma(double shape, double scale) {
    if (shape < 1.0) {
      double u = 1.0 - u01();  // (0, 1]
      return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double z = normal(0.0, 1.0);
      double t = 1.0 + c * z;
      if (t <= 0.0) continue;
      double v = t * t * t;
      double u = 1.0 - u01();  // (0, 1]
      if (std::log(u) < 0.5 * z * z + d - d * v + d * std::log(v)) {
        return d * v * scale;
      }
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace loopsched
