#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace grounding {

/// Root of a reproducible random stream.  Every consumer that needs
/// randomness derives its own child seed from a stable key so results do not
/// depend on call order or thread scheduling.
struct Seed {
  std::uint64_t value = 0;

  friend bool operator==(Seed, Seed) = default;
};

/// Stable 64-bit FNV-1a hash; identical on every platform.
constexpr std::uint64_t stable_hash(std::string_view key) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : key) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr Seed derive(Seed parent, std::string_view key) noexcept {
  return Seed{splitmix64(parent.value ^ splitmix64(stable_hash(key)))};
}

constexpr Seed derive(Seed parent, std::uint64_t index) noexcept {
  return Seed{splitmix64(parent.value ^ splitmix64(index + 0x632be59bd9b4e019ULL))};
}

/// Thin wrapper over mt19937_64.  `uniform_below` is implemented here rather
/// than via std::uniform_int_distribution, whose output is library-specific.
class Rng {
 public:
  explicit Rng(Seed seed) : engine_(seed.value) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, bound).  `bound` must be positive.
  std::uint64_t uniform_below(std::uint64_t bound) {
    // Rejection sampling on the top of the range keeps the draw unbiased.
    const std::uint64_t limit = bound * ((~std::uint64_t{0}) / bound);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace grounding
