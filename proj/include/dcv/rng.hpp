#pragma once

// Deterministic random streams.
//
// Engine: xoshiro256++ seeded through splitmix64, so a 64-bit seed expands to
// a full engine state. Every consumer owns its stream; nothing global.
//
// Seed splitting: derive_stream(seed, id) = mix64(seed + GAMMA * (id + 1)).
// Experiments derive one stream per cell and replication as
//   Rng(derive_stream(derive_stream(master, cell), replication))
// which makes each replication's draws independent of scheduling, thread
// count, and of how many replications ran before it.

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>

namespace dcv {

inline constexpr std::uint64_t kSeedGamma = 0x9E3779B97F4A7C15ull;

[[nodiscard]] inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

[[nodiscard]] inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t id) {
  return mix64(seed + kSeedGamma * (id + 1));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) {
      s += kSeedGamma;
      word = mix64(s);
    }
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // Unbiased integer in [0, n) via Lemire's multiply-shift rejection.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (lo < threshold) {
        m = static_cast<unsigned __int128>(next_u64()) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  std::size_t index(std::size_t n) { return static_cast<std::size_t>(below(n)); }

  // Standard normal, Marsaglia polar method. No cached second value, so the
  // draw sequence is a pure function of the stream position.
  double normal() {
    while (true) {
      const double u = 2.0 * uniform01() - 1.0;
      const double v = 2.0 * uniform01() - 1.0;
      const double s = u * u + v * v;
      if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }

  // Index draw from a finite distribution by inverse CDF walk. Weights must
  // be non-negative; they are treated as already normalized.
  std::size_t categorical(std::span<const double> weights) {
    const double u = uniform01();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return i;
    }
    return weights.empty() ? 0 : weights.size() - 1;
  }

  template <typename T>
  void shuffle(std::span<T> xs) {
    for (std::size_t i = xs.size(); i > 1; --i) {
      const std::size_t j = index(i);
      std::swap(xs[i - 1], xs[j]);
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
};

}  // namespace dcv
