#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "fzero/dataset.hpp"
#include "fzero/errors.hpp"
#include "fzero/hash.hpp"
#include "fzero/ledger.hpp"

// Simulated coordinator model: alpha servers, each with a private channel
// to the coordinator, communicating in sequential rounds.  There is no
// player-to-player channel in this API, so protocols cannot express one.
// Sampling decisions use shared public randomness (the run seed), which is
// never charged against the communication budget.

namespace fzero {

struct ProtocolResult {
  double estimate = 0.0;
  std::uint64_t bits_used = 0;
  std::uint64_t rounds = 0;
  int level_used = 0;
  double eps = 0.0;
  std::uint64_t c_budget = 0;
  std::uint64_t seed = 0;
  bool converged = true;  // false only when an iterative protocol hit its cap
};

class SimNetwork {
 public:
  SimNetwork(const Dataset& ds, std::uint64_t seed)
      : ds_(&ds), seed_(seed), f1_(f1_exact(ds)) {
    validate_dataset(ds);
    cost_ = CostModel::for_dataset(ds.n, f1_);
  }

  const Dataset& dataset() const { return *ds_; }
  std::uint32_t alpha() const { return ds_->alpha(); }
  std::span<const std::uint64_t> shard(std::uint32_t a) const {
    return ds_->shards[a];
  }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t f1() const { return f1_; }
  const CostModel& cost() const { return cost_; }
  const CommLedger& ledger() const { return ledger_; }

  // Player -> coordinator message (the only uplink).
  void uplink(std::uint32_t round, std::uint32_t player, const char* phase,
              std::uint64_t payload_bits) {
    ledger_.charge(round, Direction::kToCoordinator, player, phase,
                   payload_bits);
  }

  // Coordinator -> player message (the only downlink).
  void downlink(std::uint32_t round, std::uint32_t player, const char* phase,
                std::uint64_t payload_bits) {
    ledger_.charge(round, Direction::kToPlayer, player, phase, payload_bits);
  }

 private:
  const Dataset* ds_;
  std::uint64_t seed_;
  std::uint64_t f1_;
  CostModel cost_;
  CommLedger ledger_;
};

namespace detail {

// Deepest surviving level of every held item, per shard, under `sampler`.
inline std::vector<std::vector<int>> shard_levels(const Dataset& ds,
                                                  const LevelSampler& sampler) {
  std::vector<std::vector<int>> levels(ds.shards.size());
  for (std::size_t a = 0; a < ds.shards.size(); ++a) {
    levels[a].reserve(ds.shards[a].size());
    for (std::uint64_t id : ds.shards[a])
      levels[a].push_back(sampler.max_level(id));
  }
  return levels;
}

// Largest level i >= 0 whose expected survivor count still exceeds the
// target budget 1000/eps^2; 0 when even the full set fits.
inline int pick_send_level(double x, double eps) {
  const double cap = 1000.0 / (eps * eps);
  int i = 0;
  while (x / std::exp2(i + 1) > cap) ++i;
  return i;
}

}  // namespace detail

// Constant-factor estimate: descend nested level sets from the top; at each
// level every player sends its surviving items; stop once the coordinator
// has seen enough distinct items (or level 0 is reached, which is exact).
// Empirically a 4-approximation in well over 90% of seeds.
inline ProtocolResult constant_factor_f0(SimNetwork& net) {
  if (net.f1() == 0) throw EmptyDataset("constant_factor_f0: dataset holds no items");
  const Dataset& ds = net.dataset();
  const LevelSampler sampler{net.seed(), kSaltConstFactor};
  const auto levels = detail::shard_levels(ds, sampler);

  const int start = static_cast<int>(ceil_log2(ds.n));
  // Stop threshold: large enough that a union bound over all visited levels
  // keeps every level's survivor count concentrated.
  const std::uint64_t tau = std::max<std::uint64_t>(
      32, static_cast<std::uint64_t>(
              std::ceil(8.0 * std::log2(std::log2(static_cast<double>(ds.n)) + 2.0))));

  std::uint32_t round = 0;
  for (int i = start;; --i) {
    std::unordered_set<std::uint64_t> distinct;
    for (std::uint32_t a = 0; a < net.alpha(); ++a) {
      const auto shard = net.shard(a);
      std::uint64_t cnt = 0;
      for (std::size_t k = 0; k < shard.size(); ++k) {
        if (levels[a][k] >= i) {
          ++cnt;
          distinct.insert(shard[k]);
        }
      }
      net.uplink(round, a, "const4", cnt * net.cost().item_id_bits);
    }
    ++round;
    if (distinct.size() >= tau || i == 0) {
      ProtocolResult r;
      r.estimate = static_cast<double>(distinct.size()) * std::exp2(i);
      r.bits_used = net.ledger().total_bits();
      r.rounds = round;
      r.level_used = i;
      r.seed = net.seed();
      return r;
    }
  }
}

// (1+eps)-estimate by direct subsampling: pick the deepest level whose
// expected survivor count still exceeds 1000/eps^2, have every player send
// its surviving items, and scale the distinct count back up.  The send
// phase samples under its own salt, independent of the constant-factor
// subroutine, so E[estimate] = f0 exactly.
inline ProtocolResult eps_approx_f0(SimNetwork& net, double eps) {
  const ProtocolResult base = constant_factor_f0(net);
  const int i = detail::pick_send_level(base.estimate, eps);

  const LevelSampler sampler{net.seed(), kSaltGeomSend};
  std::unordered_set<std::uint64_t> distinct;
  const auto round = static_cast<std::uint32_t>(base.rounds);
  for (std::uint32_t a = 0; a < net.alpha(); ++a) {
    std::uint64_t cnt = 0;
    for (std::uint64_t id : net.shard(a)) {
      if (sampler.in_level(id, i)) {
        ++cnt;
        distinct.insert(id);
      }
    }
    net.uplink(round, a, "eps.send", cnt * net.cost().item_id_bits);
  }

  ProtocolResult r;
  r.estimate = static_cast<double>(distinct.size()) * std::exp2(i);
  r.bits_used = net.ledger().total_bits();
  r.rounds = base.rounds + 1;
  r.level_used = i;
  r.eps = eps;
  r.seed = net.seed();
  return r;
}

// Collision-budgeted (1+eps)-estimate.  Players first send only their
// survivor *counts* at the chosen level (cheap); the duplicated mass that
// inflates that sum is then estimated from a Bernoulli subsample of the
// level set, sized by the caller's collision budget, and subtracted.
// The level index is clamped at 0 (level sets are only defined downward).
inline ProtocolResult collision_bounded_f0(SimNetwork& net, double eps,
                                           std::uint64_t c_budget) {
  const ProtocolResult base = constant_factor_f0(net);
  const double x = base.estimate;
  const int i = detail::pick_send_level(x, eps);
  const LevelSampler lvl{net.seed(), kSaltCollisionLevel};

  // Count phase: one integer per player; Z = sum = held-item mass of the
  // level set.
  auto round = static_cast<std::uint32_t>(base.rounds);
  std::uint64_t z = 0;
  std::vector<std::vector<std::uint64_t>> survivors(net.alpha());
  for (std::uint32_t a = 0; a < net.alpha(); ++a) {
    for (std::uint64_t id : net.shard(a))
      if (lvl.in_level(id, i)) survivors[a].push_back(id);
    z += survivors[a].size();
    net.uplink(round, a, "coll.count", net.cost().count_bits);
  }
  ++round;

  // Item phase: Bernoulli(p) subsample of the level set; the coordinator
  // sees every held copy of a sampled item, so the excess mass of the
  // sample is exact and W/p estimates the level set's excess mass.
  const double eta = eps / 10.0;
  const double p = std::min(
      1.0, 100.0 * static_cast<double>(c_budget) / (eta * eta * x * x));
  std::unordered_map<std::uint64_t, std::uint64_t> copies;
  for (std::uint32_t a = 0; a < net.alpha(); ++a) {
    std::uint64_t cnt = 0;
    for (std::uint64_t id : survivors[a]) {
      if (lvl.in_bernoulli(id, p, kSaltCollisionBern)) {
        ++cnt;
        ++copies[id];
      }
    }
    net.uplink(round, a, "coll.items", cnt * net.cost().item_id_bits);
  }

  double w = 0.0;
  for (const auto& [id, h] : copies) w += static_cast<double>(h - 1);

  ProtocolResult r;
  r.estimate = static_cast<double>(z) * std::exp2(i) - (w > 0.0 ? w / p : 0.0);
  r.bits_used = net.ledger().total_bits();
  r.rounds = base.rounds + 2;
  r.level_used = i;
  r.eps = eps;
  r.c_budget = c_budget;
  r.seed = net.seed();
  return r;
}

struct DupParams {
  double xi = 8.0;              // hash-vector size multiplier
  std::uint64_t max_iters = 64;  // iteration cap before giving up
  double p_constant = 1.0;      // scales the universe sampling rate
};

// Duplication count estimate.  Sample the universe at rate ~1/(C*eps^2);
// players repeatedly hash their surviving items into a shared vector and
// send the non-zero positions.  Items whose position was reported by one
// player only, with no co-hashed sibling of their own, are provably
// unduplicated and get removed.  Once no two distinct items share a
// position, positions reported by >= 2 players are exactly the sampled
// duplicated items.
inline ProtocolResult duplication_estimate(SimNetwork& net, double eps,
                                           std::uint64_t c_budget,
                                           DupParams dp = {}) {
  if (net.f1() == 0)
    throw EmptyDataset("duplication_estimate: dataset holds no items");
  const Dataset& ds = net.dataset();
  const std::uint32_t alpha = net.alpha();

  const double denom = static_cast<double>(c_budget) * eps * eps;
  const double p = denom > 0.0 ? std::min(1.0, dp.p_constant / denom) : 1.0;

  const LevelSampler uni{net.seed(), kSaltDupUniverse};
  std::vector<std::vector<std::uint64_t>> remaining(alpha);
  std::size_t s_max = 0;
  for (std::uint32_t a = 0; a < alpha; ++a) {
    s_max = std::max(s_max, ds.shards[a].size());
    for (std::uint64_t id : ds.shards[a])
      if (uni.in_bernoulli(id, p, 0)) remaining[a].push_back(id);
  }

  const double m_raw = dp.xi * static_cast<double>(alpha) *
                       static_cast<double>(s_max) / (denom > 0.0 ? denom : 1.0);
  const auto m = std::max<std::uint64_t>(
      16, static_cast<std::uint64_t>(std::ceil(m_raw)));
  const std::uint64_t pos_bits = std::max<std::uint64_t>(1, ceil_log2(m));

  constexpr std::uint64_t kNoItem = ~std::uint64_t{0};
  struct PosInfo {
    std::uint32_t players = 0;
    std::uint64_t item0 = kNoItem;
    bool multi_item = false;
  };

  bool converged = false;
  std::uint64_t d_prime = 0;
  std::uint64_t rounds = 0;
  for (std::uint64_t iter = 1; iter <= dp.max_iters; ++iter) {
    rounds = iter;
    const std::uint64_t salt_r = kSaltDupRound ^ (kGoldenGamma * iter);
    std::unordered_map<std::uint64_t, PosInfo> info;
    std::vector<std::unordered_map<std::uint64_t, std::uint32_t>> own(alpha);
    for (std::uint32_t a = 0; a < alpha; ++a) {
      for (std::uint64_t id : remaining[a]) {
        const std::uint64_t pos = hash64(net.seed(), salt_r, id) % m;
        ++own[a][pos];
        auto& pi = info[pos];
        if (pi.item0 == kNoItem)
          pi.item0 = id;
        else if (pi.item0 != id)
          pi.multi_item = true;
      }
      for (const auto& [pos, cnt] : own[a]) ++info[pos].players;
      net.uplink(static_cast<std::uint32_t>(iter - 1), a, "dup.pos",
                 own[a].size() * pos_bits);
    }

    d_prime = 0;
    bool any_multi = false;
    for (const auto& [pos, pi] : info) {
      if (pi.players >= 2) ++d_prime;
      any_multi = any_multi || pi.multi_item;
    }
    if (!any_multi) {
      converged = true;
      break;
    }

    for (std::uint32_t a = 0; a < alpha; ++a) {
      auto& rem = remaining[a];
      std::vector<std::uint64_t> kept;
      kept.reserve(rem.size());
      for (std::uint64_t id : rem) {
        const std::uint64_t pos = hash64(net.seed(), salt_r, id) % m;
        const auto& pi = info.at(pos);
        const bool isolated = pi.players == 1 && own[a].at(pos) == 1;
        if (!isolated) kept.push_back(id);
      }
      rem = std::move(kept);
    }
  }

  ProtocolResult r;
  r.estimate = static_cast<double>(d_prime) / p;
  r.bits_used = net.ledger().total_bits();
  r.rounds = rounds;
  r.level_used = 0;
  r.eps = eps;
  r.c_budget = c_budget;
  r.seed = net.seed();
  r.converged = converged;
  return r;
}

}  // namespace fzero
