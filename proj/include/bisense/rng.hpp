#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace bisense {

// Counter-style 64-bit generator (SplitMix64).  Chosen over std::mt19937
// because the whole pipeline promises bit-identical output for a given seed
// regardless of platform or thread count: the generator is tiny, the stream
// derivation below is explicit, and every consumer owns its own instance.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~0ULL; }

  result_type operator()() { return next(); }

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform double in (0, 1]; safe to feed into log().
  double uniform_pos() {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; second draw of each pair is cached so
  // consecutive calls consume the underlying stream deterministically.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    const double theta = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  // Circularly-symmetric complex normal with total variance sigma2.
  std::complex<double> complex_gaussian(double sigma2) {
    const double s = std::sqrt(sigma2 * 0.5);
    const double re = gaussian();
    const double im = gaussian();
    return {s * re, s * im};
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Named sub-streams.  Every random decision in the pipeline draws from a
// stream derived as  finalize(base + GOLDEN * (tag + 1)), so two streams with
// different tags (or bases) are decorrelated and adding a new consumer never
// shifts the draws seen by existing ones.
enum class Stream : std::uint64_t {
  kSensingGrid = 1,   // QPSK reference symbols
  kClutter = 2,       // static scatterer positions / RCS
  kTarget = 3,        // target position / velocity
  kNoise = 4,         // receiver noise
  kSplit = 5,         // train/validation shuffling
  kInit = 6,          // network weight init
  kShuffle = 7,       // per-epoch batch order (epoch index is added on top)
  kTrainBase = 8,     // dataset bases derived by the sweep driver
  kTestBase = 9,
  kSelfTest = 10,
};

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, Stream tag,
                                 std::uint64_t salt = 0) {
  const std::uint64_t t = static_cast<std::uint64_t>(tag) + 1 + salt;
  return mix64(base + 0x9E3779B97F4A7C15ULL * t);
}

inline SplitMix64 derive_stream(std::uint64_t base, Stream tag,
                                std::uint64_t salt = 0) {
  return SplitMix64(derive_seed(base, tag, salt));
}

}  // namespace bisense
