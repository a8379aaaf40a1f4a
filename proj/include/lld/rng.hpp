#pragma once

#include <cstdint>

namespace lld {

/// Pseudo-random stream addressed by (seed, stream index).
///
/// Each stream is a xoshiro256** generator whose state is derived by running
/// splitmix64 over the pair (seed, stream). Streams with different indices are
/// statistically independent for all practical purposes, so Monte Carlo work can
/// be cut into fixed substreams and handed to any number of threads without
/// changing the numbers drawn.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();

  /// Uniform variate in the open interval (0,1), 53 bits of resolution.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace lld
