#pragma once

// Counter-based pseudo-random numbers with hand-written samplers.
//
// Output of draw number `c` under key `k` is a pure function of (k, c), so the
// full generator state is two integers and snapshots are trivially exact.
// Samplers avoid <random> distributions, whose algorithms differ between
// standard libraries.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace ebp {

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class CounterRng {
 public:
  CounterRng() = default;
  constexpr CounterRng(std::uint64_t key, std::uint64_t counter = 0) noexcept
      : key_(key), counter_(counter) {}

  // Independent keys for named sub-streams of one seed.
  static constexpr CounterRng stream(std::uint64_t seed, std::uint64_t stream_id) noexcept {
    return CounterRng(mix64(mix64(seed) + 0x9E3779B97F4A7C15ULL * (stream_id + 1)));
  }

  constexpr std::uint64_t next_u64() noexcept {
    return mix64(key_ ^ mix64(++counter_ * 0x9E3779B97F4A7C15ULL));
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1); safe to take the logarithm of.
  double uniform_open() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

  friend constexpr bool operator==(const CounterRng&, const CounterRng&) = default;

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

// Box-Muller without caching the second variate: two uniforms per draw.
inline double standard_normal(CounterRng& rng) noexcept {
  const double r = std::sqrt(-2.0 * std::log(rng.uniform_open()));
  return r * std::cos(2.0 * std::numbers::pi * rng.uniform());
}

// Marsaglia-Tsang; shapes below one use the U^(1/shape) boost and shape one
// is drawn as an exponential.
double gamma_variate(CounterRng& rng, double shape, double scale) noexcept;

// Number of failures before the first success, P(z) = p (1 - p)^z.
inline std::uint32_t geometric_failures(CounterRng& rng, double p) noexcept {
  if (p >= 1.0) return 0;
  const double z = std::floor(std::log(rng.uniform_open()) / std::log1p(-p));
  return z > 1e9 ? 1000000000u : static_cast<std::uint32_t>(z);
}

}  // namespace ebp
