#pragma once

#include <cstdint>
#include <random>

namespace pretestcov {

/// Identifies one independent random stream. Streams are derived from the
/// full key rather than from a shared generator, so a block of repetitions
/// produces the same draws regardless of which thread runs it or when.
struct StreamKey {
  std::uint64_t seed = 0;
  std::uint64_t stage = 0;
  std::uint64_t point = 0;
  std::uint64_t block = 0;
};

inline std::mt19937_64 make_engine(const StreamKey& key) {
  const auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v); };
  const auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(key.seed),  hi(key.seed),  lo(key.stage), hi(key.stage),
                    lo(key.point), hi(key.point), lo(key.block), hi(key.block)};
  return std::mt19937_64(seq);
}

}  // namespace pretestcov
