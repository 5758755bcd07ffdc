#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fzero/dataset.hpp"
#include "fzero/errors.hpp"
#include "fzero/hash.hpp"

// Synthetic dataset generators, edge-list ingestion, and power-law fitting.

namespace fzero {

// Power-law replication: the item of rank i is held by
// clamp(round(c_z / i^s), 1, alpha) servers, so the rank-frequency curve is
// sandwiched between (c_z/2)/i^s and (2*c_z)/i^s wherever the clamp is
// inactive.
struct ZipfSpec {
  double s = 1.0;          // decay exponent
  double c_z = 1.0;        // leading constant
  std::uint64_t support = 0;  // number of distinct items (ranks)
  std::uint64_t n = 0;        // universe size (>= support)
  std::uint32_t alpha = 1;    // number of servers
  std::uint64_t seed = 0;     // server-assignment randomness
};

inline Dataset gen_zipfian_dataset(const ZipfSpec& z) {
  if (z.support == 0) throw InvalidSpec("zipf: support must be positive");
  if (z.support > z.n) throw InvalidSpec("zipf: support exceeds universe");
  if (z.alpha == 0) throw InvalidSpec("zipf: need at least one server");
  if (!(z.c_z > 0.0)) throw InvalidSpec("zipf: c_z must be positive");
  if (!(z.s >= 0.0)) throw InvalidSpec("zipf: s must be non-negative");

  std::vector<std::vector<std::uint64_t>> shards(z.alpha);
  std::vector<std::uint32_t> players(z.alpha);
  for (std::uint64_t i = 1; i <= z.support; ++i) {
    const double raw =
        z.c_z / std::pow(static_cast<double>(i), z.s);
    auto k = static_cast<std::uint64_t>(std::llround(raw));
    k = std::clamp<std::uint64_t>(k, 1, z.alpha);
    // Partial Fisher-Yates keyed per rank: the first k entries after the
    // swaps are the chosen servers.
    std::iota(players.begin(), players.end(), 0);
    SplitMix64 rng{hash64(z.seed, 0x5a1fb2d4c6e8a917ULL, i)};
    for (std::uint64_t j = 0; j < k; ++j) {
      const std::uint64_t pick = j + rng.bounded(z.alpha - j);
      std::swap(players[j], players[pick]);
    }
    for (std::uint64_t j = 0; j < k; ++j)
      shards[players[j]].push_back(i - 1);  // rank i gets id i-1
  }
  return make_dataset(z.n, std::move(shards));
}

// Planted-collision dataset: f0_target distinct items; the first
// collisions_target of them sit on exactly two distinct servers (so both
// the excess mass and the pairwise collision count equal collisions_target)
// and the rest on one.
struct PlantedSpec {
  std::uint64_t f0_target = 0;
  std::uint64_t collisions_target = 0;
  std::uint32_t alpha = 2;
};

inline Dataset gen_planted(const PlantedSpec& p, std::uint64_t n,
                           std::uint64_t seed) {
  if (p.f0_target == 0) throw InvalidSpec("planted: f0_target must be positive");
  if (p.f0_target > n) throw InvalidSpec("planted: f0_target exceeds universe");
  if (p.collisions_target > p.f0_target)
    throw InvalidSpec("planted: more collisions than items");
  if (p.alpha == 0 || (p.collisions_target > 0 && p.alpha < 2))
    throw InvalidSpec("planted: collisions need at least two servers");

  std::vector<std::vector<std::uint64_t>> shards(p.alpha);
  SplitMix64 rng{mix64(seed ^ 0x7c3da9e1f5b26840ULL)};
  for (std::uint64_t id = 0; id < p.f0_target; ++id) {
    const auto a = static_cast<std::uint32_t>(rng.bounded(p.alpha));
    shards[a].push_back(id);
    if (id < p.collisions_target) {
      auto b = static_cast<std::uint32_t>(rng.bounded(p.alpha - 1));
      if (b >= a) ++b;  // distinct second server
      shards[b].push_back(id);
    }
  }
  return make_dataset(n, std::move(shards));
}

// ---------------------------------------------------------------------------
// Edge-list ingestion.

struct EdgeRecord {
  std::string src;  // sender
  std::string dst;  // receiver
};

// Two comma-separated columns per line: sender,receiver.  A header line is
// skipped iff the first line's first field is not purely numeric.
inline std::vector<EdgeRecord> load_edges(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open for reading: " + path);
  std::vector<EdgeRecord> edges;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected 'sender,receiver'");
    std::string src = line.substr(0, comma);
    std::string dst = line.substr(comma + 1);
    if (src.empty() || dst.empty() || dst.find(',') != std::string::npos)
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected exactly two non-empty fields");
    if (first) {
      first = false;
      const bool numeric =
          src.find_first_not_of("0123456789") == std::string::npos;
      if (!numeric) continue;  // header row
    }
    edges.push_back({std::move(src), std::move(dst)});
  }
  if (edges.empty()) throw EmptyFile("edge file has no records: " + path);
  return edges;
}

// One server per receiver (in order of first appearance); senders interned
// to a dense universe [0, #distinct senders) in order of first appearance;
// duplicate (sender, receiver) pairs collapse to one held item.
inline Dataset partition_by_receiver(const std::vector<EdgeRecord>& edges) {
  if (edges.empty()) throw EmptyFile("no edges to partition");
  std::unordered_map<std::string, std::uint64_t> sender_id;
  std::unordered_map<std::string, std::uint32_t> receiver_id;
  std::vector<std::vector<std::uint64_t>> shards;
  for (const auto& e : edges) {
    const auto [sit, snew] =
        sender_id.try_emplace(e.src, sender_id.size());
    const auto [rit, rnew] =
        receiver_id.try_emplace(e.dst, receiver_id.size());
    if (rnew) shards.emplace_back();
    shards[rit->second].push_back(sit->second);
  }
  for (auto& shard : shards) {
    std::sort(shard.begin(), shard.end());
    shard.erase(std::unique(shard.begin(), shard.end()), shard.end());
  }
  return make_dataset(sender_id.size(), std::move(shards));
}

// Descending count of distinct senders per receiver.
inline std::vector<std::uint64_t> receiver_histogram(
    const std::vector<EdgeRecord>& edges) {
  const Dataset ds = partition_by_receiver(edges);
  std::vector<std::uint64_t> counts;
  counts.reserve(ds.shards.size());
  for (const auto& shard : ds.shards) counts.push_back(shard.size());
  std::sort(counts.begin(), counts.end(), std::greater<>());
  return counts;
}

// Descending interaction count per sender within the most active receiver
// (most raw edges; ties broken by first appearance).  Repeated edges count.
inline std::vector<std::uint64_t> activity_histogram(
    const std::vector<EdgeRecord>& edges) {
  if (edges.empty()) throw EmptyFile("no edges");
  std::unordered_map<std::string, std::uint64_t> receiver_edges;
  std::vector<const std::string*> order;
  for (const auto& e : edges) {
    auto [it, fresh] = receiver_edges.try_emplace(e.dst, 0);
    if (fresh) order.push_back(&it->first);
    ++it->second;
  }
  const std::string* top = order.front();
  for (const std::string* r : order)
    if (receiver_edges[*r] > receiver_edges[*top]) top = r;
  std::unordered_map<std::string, std::uint64_t> per_sender;
  for (const auto& e : edges)
    if (e.dst == *top) ++per_sender[e.src];
  std::vector<std::uint64_t> counts;
  counts.reserve(per_sender.size());
  for (const auto& [src, c] : per_sender) counts.push_back(c);
  std::sort(counts.begin(), counts.end(), std::greater<>());
  return counts;
}

// ---------------------------------------------------------------------------
// Power-law fit: least squares on (ln rank, ln count) over positive counts.
// For an exact series x_i = c_z / i^s this recovers (s, c_z) to rounding.
struct ZipfFit {
  double s = 0.0;
  double c_z = 0.0;
};

inline ZipfFit fit_zipf(std::span<const double> counts_by_rank) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::uint64_t m = 0;
  for (std::size_t i = 0; i < counts_by_rank.size(); ++i) {
    if (!(counts_by_rank[i] > 0.0)) continue;
    const double x = std::log(static_cast<double>(i + 1));
    const double y = std::log(counts_by_rank[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 2)
    throw DegenerateInput("fit_zipf: need at least two positive counts");
  const double dm = static_cast<double>(m);
  const double denom = dm * sxx - sx * sx;
  if (denom == 0.0)
    throw DegenerateInput("fit_zipf: ranks are collinear");
  const double slope = (dm * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / dm;
  return {-slope, std::exp(intercept)};
}

}  // namespace fzero
