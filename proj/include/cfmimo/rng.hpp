#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace cfmimo {

inline uint64_t splitmix64_next(uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Deterministic generator used throughout the project. The uniform and
// normal transforms are spelled out here rather than taken from <random>
// distributions, so a given seed produces the same stream on every standard
// library (mt19937_64 itself is bit-specified).
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe as a log() argument.
  double uniform_pos() {
    return (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller. One value per uniform pair; no cached
  // spare, so the stream position is a pure function of the call count.
  double normal() {
    const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    return r * std::cos(kTwoPi * uniform());
  }

  // Circularly symmetric complex normal CN(0, 1), E|z|^2 = 1.
  std::complex<double> cnormal() {
    const double r = std::sqrt(-std::log(uniform_pos()));
    const double th = kTwoPi * uniform();
    return {r * std::cos(th), r * std::sin(th)};
  }

  // Unit-modulus symbol, uniform phase.
  std::complex<double> unit_circle() {
    const double th = kTwoPi * uniform();
    return {std::cos(th), std::sin(th)};
  }

  // Derives an independent substream seed (e.g. per drop index) so parallel
  // workers never share a stream.
  static uint64_t derive(uint64_t seed, uint64_t stream, uint64_t substream = 0) {
    uint64_t state = seed;
    uint64_t z = splitmix64_next(state);
    state ^= (stream + 1) * 0xD1B54A32D192ED03ull;
    z ^= splitmix64_next(state);
    state ^= (substream + 1) * 0x8CB92BA72F3D8DD7ull;
    z ^= splitmix64_next(state);
    return z;
  }

 private:
  static constexpr double kTwoPi = 6.283185307179586476925286766559;
  std::mt19937_64 gen_;
};

}  // namespace cfmimo
