#pragma once

#include <cstdint>

namespace rlo {

/// Stateless, counter-based random numbers.
///
/// Every draw is a pure function of (seed, stream, counter, lane), so
/// trajectories are reproducible and independent of evaluation order or thread
/// scheduling. The mixing function is the SplitMix64 finalizer applied to each
/// key word in turn.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t bits(std::uint64_t stream, std::uint64_t counter,
                     std::uint64_t lane = 0) const;
  /// Uniform in the open interval (0, 1).
  double uniform(std::uint64_t stream, std::uint64_t counter,
                 std::uint64_t lane = 0) const;
  /// Standard normal via Box-Muller on two keyed uniforms.
  double normal(std::uint64_t stream, std::uint64_t counter) const;

  /// A child generator whose draws are independent of the parent's.
  CounterRng split(std::uint64_t child) const;

  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
};

std::uint64_t mix64(std::uint64_t x);

}  // namespace rlo
