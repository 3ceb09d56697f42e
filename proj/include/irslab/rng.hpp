#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace irslab {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}
inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace detail

/// Deterministic, seedable, splittable generator (xoshiro256++ core, splitmix64
/// seeding). Streams derived via derive() depend only on the origin seed and the
/// tags, never on how much the parent has been consumed, so realizations can run
/// in any order (or in parallel) without changing results. Gaussian variates use
/// an explicit Box-Muller transform so sequences are identical across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : origin_(seed) {
    std::uint64_t sm = seed;
    for (auto& s : state_) s = detail::splitmix64(sm);
  }

  /// Child stream keyed by (origin seed, a, b); independent of parent state.
  Rng derive(std::uint64_t a, std::uint64_t b = 0) const {
    std::uint64_t sm = origin_;
    std::uint64_t h = detail::splitmix64(sm);
    sm = h ^ (0x9E3779B97F4A7C15ULL * (a + 1));
    h = detail::splitmix64(sm);
    sm = h ^ (0xC2B2AE3D27D4EB4FULL * (b + 1));
    h = detail::splitmix64(sm);
    return Rng(h);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform phase in [0, 2*pi).
  double uniform_phase() { return uniform() * 2.0 * M_PI; }

  /// Circularly-symmetric complex Gaussian CN(0, variance): real and imaginary
  /// parts are each N(0, variance/2).
  std::complex<double> cnormal(double variance) {
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log() finite
    const double u2 = uniform();
    const double r = std::sqrt(-std::log(u1) * variance);
    return {r * std::cos(2.0 * M_PI * u2), r * std::sin(2.0 * M_PI * u2)};
  }

  /// Standard normal N(0, 1).
  double normal() { return cnormal(2.0).real(); }

  std::uint64_t origin_seed() const { return origin_; }

 private:
  std::uint64_t origin_;
  std::uint64_t state_[4];
};

}  // namespace irslab
