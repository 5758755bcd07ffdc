#pragma once

#include <bit>
#include <cstdint>

// Keyed 64-bit hashing and the shared-randomness samplers built on it.
// Every randomized component in the library draws its bits from hash64 so
// that a run is fully determined by (inputs, seed).  The constant sequence
// below is frozen; golden tests pin the exact output values so persisted
// results stay replayable across versions.

namespace fzero {

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;
inline constexpr std::uint64_t kMixMul1 = 0xbf58476d1ce4e5b9ULL;
inline constexpr std::uint64_t kMixMul2 = 0x94d049bb133111ebULL;

// Avalanche finalizer: xor-shift + odd-constant multiply rounds.  Bijective
// on 64-bit values, so for a fixed key distinct items never collide in the
// full 64-bit image.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= kMixMul1;
  z ^= z >> 27;
  z *= kMixMul2;
  z ^= z >> 31;
  return z;
}

// Keyed hash of (seed, salt, item): three sequential absorb+mix rounds.
// For a fixed (seed, salt) this is a bijection of the item space.
constexpr std::uint64_t hash64(std::uint64_t seed, std::uint64_t salt,
                               std::uint64_t item) noexcept {
  std::uint64_t h = mix64(seed ^ kGoldenGamma);
  h = mix64(h ^ salt);
  h = mix64(h ^ item);
  return h;
}

// Domain-separation salts.  Each protocol phase that needs randomness
// independent from the others hashes under its own salt.
inline constexpr std::uint64_t kSaltConstFactor = 0x9d8f3c1a2b4e5d61ULL;
inline constexpr std::uint64_t kSaltGeomSend = 0x71f2e4d8c3b5a697ULL;
inline constexpr std::uint64_t kSaltCollisionLevel = 0x3c6e9a1d4f7b8e25ULL;
inline constexpr std::uint64_t kSaltCollisionBern = 0xa1b5c9d3e7f10b2fULL;
inline constexpr std::uint64_t kSaltDupUniverse = 0x58d3b7f19e2c4a6bULL;
inline constexpr std::uint64_t kSaltDupRound = 0xe49f61a3c8d5b217ULL;
inline constexpr std::uint64_t kSaltStreamSample = 0x7b3d5f91a2c4e687ULL;
inline constexpr std::uint64_t kSaltStreamBucket = 0x2f9c4b6d8e1a3507ULL;
inline constexpr std::uint64_t kSaltStreamHint = 0x4d1e8b63f5a2c9d1ULL;
inline constexpr std::uint64_t kSaltLevelSets = 0x64a8c2e19f3b5d77ULL;
inline constexpr std::uint64_t kSaltSketchBucket = 0x15f3a7c9b1d5e829ULL;
inline constexpr std::uint64_t kSaltSketchSign = 0xc7e1f5a9d3b20941ULL;

// Nested level sets and Bernoulli subsampling over a shared (seed, salt)
// key.  Level membership is a threshold comparison on one hash value, so
// S_0 >= S_1 >= S_2 >= ... holds by construction.
struct LevelSampler {
  std::uint64_t seed = 0;
  std::uint64_t salt = 0;

  // True iff the item survives to level `level` (survival rate 2^-level).
  // Level 0 always passes; levels beyond the hash width never do.
  constexpr bool in_level(std::uint64_t item, int level) const noexcept {
    if (level <= 0) return true;
    if (level > 64) return false;
    return hash64(seed, salt, item) < (std::uint64_t{1} << (64 - level));
  }

  // Deepest level the item survives to (0..64); consistent with in_level:
  // in_level(item, l) == (l <= max_level(item)) for l in [0, 64].
  constexpr int max_level(std::uint64_t item) const noexcept {
    return std::countl_zero(hash64(seed, salt, item));
  }

  // Independent Bernoulli(p) stream keyed by salt2.  p <= 0 never passes,
  // p >= 1 always does.  For p in (0,1) the product p * 2^64 stays below
  // 2^64 in double arithmetic, so the cast is exact floor semantics.
  constexpr bool in_bernoulli(std::uint64_t item, double p,
                              std::uint64_t salt2) const noexcept {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    const auto threshold =
        static_cast<std::uint64_t>(p * 18446744073709551616.0);
    return hash64(seed, salt ^ salt2, item) < threshold;
  }
};

// Sequential deterministic RNG for workload generation (not for protocol
// randomness, which must be reproducible per item rather than per draw).
struct SplitMix64 {
  std::uint64_t state = 0;

  constexpr std::uint64_t next() noexcept {
    state += kGoldenGamma;
    return mix64(state);
  }

  // Multiply-shift range reduction; bias is O(bound/2^64), irrelevant at
  // the scales used here, and the result is platform-independent.
  constexpr std::uint64_t bounded(std::uint64_t bound) noexcept {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * bound) >> 64);
  }
};

}  // namespace fzero
