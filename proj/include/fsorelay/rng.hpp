#pragma once

#include <cstdint>

namespace fsorelay {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Named random streams. Every random draw in the library seeds its own
/// generator from (master seed, stream, index), so results never depend on
/// scheduling or on how many draws happened elsewhere.
enum class Stream : std::uint64_t {
  hop1_screen = 1,
  hop2_screen = 2,
  split_step = 3,
  bits = 4,
  oracle = 5,
  test = 6,
};

inline constexpr std::uint64_t derive_seed(std::uint64_t master, Stream stream, std::uint64_t index,
                                           std::uint64_t sub = 0) noexcept {
  std::uint64_t s = splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(stream)));
  s = splitmix64(s ^ index);
  return splitmix64(s ^ (sub * 0xD1B54A32D192ED03ULL));
}

}  // namespace fsorelay
