#pragma once

#include <cmath>
#include <cstdint>

namespace lrgame {

using Spin = std::int8_t;

// Purpose tags for keyed variates. Values are part of the replay contract:
// changing one changes every trajectory drawn from that stream.
enum class Stream : std::uint64_t {
  edge = 1,
  feeling = 2,
  init = 3,
  clock = 4,
  coin = 5,
  replica = 6,
  bootstrap = 7,
  sample = 8,
};

/// Counter-based randomness: every variate is a pure function of
/// (master seed, stream, key a, key b, index). Nothing is consumed, so the
/// same variate can be re-drawn in any order, from any replica copy.
class RandomnessPlan {
 public:
  explicit constexpr RandomnessPlan(std::uint64_t master_seed) noexcept : seed_(master_seed) {}

  constexpr std::uint64_t master_seed() const noexcept { return seed_; }

  constexpr std::uint64_t bits(Stream stream, std::uint64_t a, std::uint64_t b = 0,
                               std::uint64_t index = 0) const noexcept {
    std::uint64_t h = mix(seed_ ^ mix(static_cast<std::uint64_t>(stream) * 0xd1342543de82ef95ULL));
    h = mix(h ^ (a + 0x632be59bd9b4e019ULL));
    h = mix(h ^ (b + 0x8cb92ba72f3d8dd7ULL));
    h = mix(h ^ (index + 0x4f1bbcdcbfa53e0bULL));
    return h;
  }

  /// Uniform on the open interval (0, 1).
  constexpr double uniform(Stream stream, std::uint64_t a, std::uint64_t b = 0,
                           std::uint64_t index = 0) const noexcept {
    return (static_cast<double>(bits(stream, a, b, index) >> 11) + 0.5) * 0x1.0p-53;
  }

  double exponential(Stream stream, std::uint64_t a, std::uint64_t b = 0,
                     std::uint64_t index = 0) const noexcept {
    return -std::log(uniform(stream, a, b, index));
  }

  constexpr Spin fair_spin(Stream stream, std::uint64_t a, std::uint64_t b = 0,
                           std::uint64_t index = 0) const noexcept {
    return (bits(stream, a, b, index) >> 63) != 0 ? Spin{1} : Spin{-1};
  }

  /// Independent plan for replica `r` of an experiment.
  constexpr RandomnessPlan replica(std::uint64_t r) const noexcept {
    return RandomnessPlan(bits(Stream::replica, r));
  }

  // splitmix64 finalizer
  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t seed_;
};

}  // namespace lrgame
