#pragma once

#include <cstdint>
#include <map>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fzero/errors.hpp"

// The data model: alpha servers, each holding a set of item ids from a
// universe [0, n).  A shard is canonically a sorted, duplicate-free id
// vector (the set-bit positions of the server's binary indicator vector).
// Exact ground-truth statistics over a dataset live here; they are the
// oracles every estimator in the library is tested against.

namespace fzero {

// Universe ids must stay well below the 53-bit double-exact range so that
// estimates and bit costs remain exact in double arithmetic.
inline constexpr std::uint64_t kMaxUniverse = std::uint64_t{1} << 48;

struct Dataset {
  std::uint64_t n = 0;                           // universe size
  std::vector<std::vector<std::uint64_t>> shards;  // one per server

  std::uint32_t alpha() const {
    return static_cast<std::uint32_t>(shards.size());
  }
};

// Enforces the canonical form; throws InvalidDataset otherwise.
inline void validate_dataset(const Dataset& ds) {
  if (ds.shards.empty()) throw InvalidDataset("dataset has no shards");
  if (ds.n == 0) throw InvalidDataset("universe size must be positive");
  if (ds.n > kMaxUniverse)
    throw InvalidDataset("universe size exceeds 2^48");
  for (std::size_t a = 0; a < ds.shards.size(); ++a) {
    const auto& shard = ds.shards[a];
    for (std::size_t k = 0; k < shard.size(); ++k) {
      if (shard[k] >= ds.n)
        throw InvalidDataset("shard " + std::to_string(a) +
                             ": id out of universe range");
      if (k > 0 && shard[k] <= shard[k - 1])
        throw InvalidDataset("shard " + std::to_string(a) +
                             ": ids must be strictly increasing");
    }
  }
}

inline Dataset make_dataset(std::uint64_t n,
                            std::vector<std::vector<std::uint64_t>> shards) {
  Dataset ds{n, std::move(shards)};
  validate_dataset(ds);
  return ds;
}

// Exact statistics.  With H_j = number of shards containing item j:
//   f0 = #{j : H_j >= 1}                      distinct items
//   f1 = sum_j H_j                            total held items
//   excess_mass = sum_j max(0, H_j - 1)       duplicated copies
//   pairwise_collisions = sum_j C(H_j, 2)     colliding pairs
// Identities: f0 = f1 - excess_mass and pairwise_collisions >= excess_mass.
struct GroundTruth {
  std::uint64_t f0 = 0;
  std::uint64_t f1 = 0;
  std::uint64_t excess_mass = 0;
  std::uint64_t pairwise_collisions = 0;
  // multiplicity -> number of items held by exactly that many shards
  std::map<std::uint64_t, std::uint64_t> multiplicity_histogram;
};

inline std::unordered_map<std::uint64_t, std::uint64_t> multiplicity_of(
    const Dataset& ds) {
  std::unordered_map<std::uint64_t, std::uint64_t> h;
  for (const auto& shard : ds.shards)
    for (std::uint64_t id : shard) ++h[id];
  return h;
}

inline std::uint64_t f1_exact(const Dataset& ds) {
  std::uint64_t total = 0;
  for (const auto& shard : ds.shards) total += shard.size();
  return total;
}

inline std::uint64_t f0_exact(const Dataset& ds) {
  return multiplicity_of(ds).size();
}

inline std::uint64_t excess_mass_exact(const Dataset& ds) {
  std::uint64_t d = 0;
  for (const auto& [id, h] : multiplicity_of(ds)) d += h - 1;
  return d;
}

inline std::uint64_t pairwise_collisions_exact(const Dataset& ds) {
  std::uint64_t c = 0;
  for (const auto& [id, h] : multiplicity_of(ds)) c += h * (h - 1) / 2;
  return c;
}

inline GroundTruth ground_truth(const Dataset& ds) {
  GroundTruth gt;
  for (const auto& [id, h] : multiplicity_of(ds)) {
    ++gt.f0;
    gt.f1 += h;
    gt.excess_mass += h - 1;
    gt.pairwise_collisions += h * (h - 1) / 2;
    ++gt.multiplicity_histogram[h];
  }
  return gt;
}

}  // namespace fzero
