#include "rlo/counter_rng.hpp"

#include <cmath>
#include <numbers>

namespace rlo {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t CounterRng::bits(std::uint64_t stream, std::uint64_t counter,
                               std::uint64_t lane) const {
  std::uint64_t h = mix64(seed_ ^ 0x5851f42d4c957f2dULL);
  h = mix64(h ^ stream);
  h = mix64(h ^ counter);
  return mix64(h ^ lane);
}

double CounterRng::uniform(std::uint64_t stream, std::uint64_t counter,
                           std::uint64_t lane) const {
  // 53 random mantissa bits, shifted off zero.
  const std::uint64_t b = bits(stream, counter, lane) >> 11;
  return (static_cast<double>(b) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t stream, std::uint64_t counter) const {
  const double u1 = uniform(stream, counter, 0);
  const double u2 = uniform(stream, counter, 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

CounterRng CounterRng::split(std::uint64_t child) const {
  return CounterRng(mix64(seed_ ^ mix64(child ^ 0xd1b54a32d192ed03ULL)));
}

}  // namespace rlo
