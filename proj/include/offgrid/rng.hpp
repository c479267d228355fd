#pragma once

#include <cmath>
#include <cstdint>

namespace offgrid {

/// Counter-based generator: every (seed, stream, replicate) triple owns an
/// independent deterministic sequence, so Monte Carlo replicates can be
/// evaluated in any order and on any number of threads with identical output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {
    // warm up so that small seeds decorrelate
    next_u64();
    next_u64();
  }

  static Rng keyed(std::uint64_t seed, std::uint64_t stream,
                   std::uint64_t replicate) {
    std::uint64_t x = seed;
    x = mix(x + 0x9E3779B97F4A7C15ULL * (stream + 1));
    x = mix(x + 0xD1B54A32D192ED03ULL * (replicate + 1));
    return Rng(x);
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  /// Uniform on (0,1), never exactly 0 or 1.
  double next_unit() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (pair cached).
  double next_gauss() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = next_unit();
    double u2 = next_unit();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace offgrid
