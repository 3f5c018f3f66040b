#pragma once

// Deterministic, platform-independent randomness. The generator and the
// bounded draw are fully specified here so identical seeds reproduce
// identical assignments on any build.

#include <cstdint>

namespace hexflow {

// splitmix64 (Vigna); also used as the finalizer for child-seed derivation.
inline std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ull;
    return splitmix64_mix(state_);
  }

  // Unbiased uniform draw in [0, n) via rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::uint64_t state_;
};

// Replication r draws from a stream seeded by this pure function of the
// master seed; cases belonging to the same replication share it.
inline std::uint64_t child_seed(std::uint64_t master_seed, std::uint64_t replication) {
  return splitmix64_mix(master_seed + (replication + 1) * 0x9e3779b97f4a7c15ull);
}

}  // namespace hexflow
