#pragma once

#include <cstdint>

namespace readout {

// Deterministic counter-based generator. Every draw is a pure function of
// (seed, stream, counter), so independent streams can be handed out per
// shot/record and replayed bit-exactly regardless of thread scheduling.
//
// The core is the SplitMix64 finalizer over a Weyl sequence; stream
// separation hashes the stream id into the starting state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : state_(mix(mix(seed) ^ (kGamma * (stream + 1)))) {}

  std::uint64_t next_u64() noexcept {
    state_ += kGamma;
    return mix(state_);
  }

  // Uniform on (0, 1): never returns 0 or 1, safe under log().
  double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54;
  }

  // Standard normal via Box-Muller; the spare deviate is cached.
  double normal() noexcept;

  // Exponential with the given mean.
  double exponential(double mean) noexcept;

  bool coin() noexcept { return (next_u64() & 1u) != 0; }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace readout
