#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rulfdia {

/// splitmix64 finalizer; derives independent seeds from (seed, stream).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);
std::uint64_t mix_seed(std::uint64_t seed, std::string_view stream_name);

/// Seeded generator with platform-independent real conversion (the standard
/// distributions are implementation-defined, which would break bit-identical runs).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n). Rejection sampling, so unbiased.
  std::uint64_t below(std::uint64_t n);
  /// Standard normal via Box-Muller (one draw per call, the pair partner is discarded).
  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace rulfdia
