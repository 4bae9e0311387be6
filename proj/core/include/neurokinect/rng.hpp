#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace nk {

// Deterministic random source used everywhere reproducibility matters.
//
// The generator is MT19937-64 (the standard 64-bit Mersenne Twister), whose
// integer output sequence is pinned by the C++ standard and therefore stable
// across platforms and standard libraries. Floating-point draws are derived
// from the integer stream with fixed arithmetic (no std::*_distribution,
// whose algorithms are implementation-defined): uniforms take the top 53
// bits, gaussians use the Box-Muller transform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1).
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
  }

  // Uniform integer in [0, n). n must be > 0. Uses rejection sampling so the
  // result is exactly uniform and platform-stable.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v;
    do {
      v = gen_();
    } while (v >= limit);
    return v % n;
  }

  // Standard normal via Box-Muller; caches the second draw.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  double gaussian(double mean, double sd) { return mean + sd * gaussian(); }

  // Deterministic Fisher-Yates shuffle driven by below().
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[static_cast<std::size_t>(below(i))]);
    }
  }

  // Derives an independent stream for a named purpose so that consumers
  // (init, split, shuffle, dropout, ...) cannot perturb each other.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream_tag) {
    // SplitMix64 finalizer over seed xor tag.
    std::uint64_t z = seed ^ (stream_tag * 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Stream tags for Rng::derive.
namespace rng_stream {
inline constexpr std::uint64_t kModelInit = 1;
inline constexpr std::uint64_t kSplit = 2;
inline constexpr std::uint64_t kShuffle = 3;
inline constexpr std::uint64_t kDropout = 4;
inline constexpr std::uint64_t kSynth = 5;
}  // namespace rng_stream

}  // namespace nk
