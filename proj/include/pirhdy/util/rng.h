#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace pirhdy {

/// Seeded random stream with fixed, platform-independent value derivation.
/// Standard-library distributions are implementation-defined, so the mappings
/// from raw engine output to doubles/integers live here.
class RngStream {
 public:
  explicit RngStream(uint64_t seed) : engine_(seed) {}

  uint64_t nextRaw() { return engine_(); }

  /// Uniform double in [0, 1).
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n). Rejection sampling keeps the draw unbiased.
  uint64_t uniformInt(uint64_t n) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  /// Standard normal via Box-Muller (no cached second value, so the stream
  /// position is a pure function of the number of calls).
  double normal(double mean, double stddev) {
    double u1;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

 private:
  std::mt19937_64 engine_;
};

/// Fisher-Yates shuffle driven by the stream (std::shuffle's draw pattern
/// is implementation-defined, which would break cross-platform runs).
template <typename T>
void shuffleVec(std::vector<T>& items, RngStream& rng) {
  for (size_t i = items.size(); i > 1; --i) {
    const size_t j = static_cast<size_t>(rng.uniformInt(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace pirhdy
