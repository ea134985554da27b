#pragma once

// Portable, platform-independent randomness. Everything that must be
// reproducible across standard libraries goes through these helpers instead
// of <random> distributions, whose outputs are implementation-defined.

#include <cstdint>
#include <span>
#include <vector>

namespace ideal {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Order-sensitive combination of two 64-bit keys.
constexpr std::uint64_t mix_keys(std::uint64_t a, std::uint64_t b) noexcept {
  return splitmix64(a ^ splitmix64(b + 0x632be59bd9b4e019ULL));
}

// Maps 64 random bits onto [0, 1) with 53-bit resolution.
constexpr double unit_interval(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Sequential generator (SplitMix64 stream).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double uniform() noexcept { return unit_interval(next()); }

  // Unbiased integer in [0, bound) by rejection; bound must be positive.
  std::uint64_t below(std::uint64_t bound) noexcept {
    const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % bound;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % bound;
  }

  // Standard normal via Box-Muller.
  double normal() noexcept;

 private:
  std::uint64_t state_;
};

// First `count` entries of a seeded Fisher-Yates shuffle of 0..n-1, i.e. a
// uniform sample without replacement in draw order.
std::vector<std::uint32_t> sample_without_replacement(std::uint32_t n,
                                                      std::uint32_t count,
                                                      std::uint64_t seed);

// Hash of a vertex set that ignores order and duplicates.
std::uint64_t subset_hash(std::span<const std::uint32_t> vertices);

}  // namespace ideal
