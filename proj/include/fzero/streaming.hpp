#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "fzero/countsketch.hpp"
#include "fzero/errors.hpp"
#include "fzero/hash.hpp"
#include "fzero/robust.hpp"

// Insertion-only streaming estimators for the number of distinct items,
// parameterized by how many items occur more than once (c_param below).

namespace fzero {

// ---------------------------------------------------------------------------
// One-pass estimator with a robust bucket mean.
//
// Subsample the universe so ~100/eps^2 distinct items survive, scatter the
// surviving updates over B = ceil(8 * c_param / eps) buckets, and take a
// trimmed mean of the bucket loads: the at-most-c_param buckets inflated by
// repeated items are outliers that the trim removes, so B * trimmed-mean
// recovers the surviving distinct count, and dividing by the sampling rate
// rescales to the full universe.
//
// The sampling rate is p = min(1, 100 / (eps^2 * x_hint)) for a cardinality
// hint x_hint in [f0/100, f0]; the hint only needs to be a constant-factor
// lower bound for the sample to be large enough.

struct OnePassResult {
  double estimate = 0.0;
  double p = 1.0;                    // realized sampling rate
  std::uint64_t buckets = 0;         // B
  std::uint64_t survivor_updates = 0;  // stream updates that survived sampling
  double trim = 0.0;                 // trim fraction actually used
};

inline OnePassResult one_pass_f0_robust(std::span<const std::uint64_t> stream,
                                        double eps, std::uint64_t c_param,
                                        double x_hint, std::uint64_t seed,
                                        std::optional<double> trim_override = {}) {
  if (!(x_hint > 0.0))
    throw InvalidHint("one_pass_f0_robust: hint must be positive");
  const double p = std::min(1.0, 100.0 / (eps * eps * x_hint));
  const auto b = std::max<std::uint64_t>(
      1, static_cast<std::uint64_t>(
             std::ceil(8.0 * static_cast<double>(c_param) / eps)));

  const LevelSampler sampler{seed, kSaltStreamSample};
  std::vector<double> loads(b, 0.0);
  std::uint64_t survivors = 0;
  for (std::uint64_t x : stream) {
    if (!sampler.in_bernoulli(x, p, 0)) continue;
    ++survivors;
    loads[hash64(seed, kSaltStreamBucket, x) % b] += 1.0;
  }

  double trim = trim_override
                    ? *trim_override
                    : std::max(0.05, 2.0 * static_cast<double>(c_param) /
                                         static_cast<double>(b));
  trim = std::min(trim, 0.49);
  const double z = static_cast<double>(b) * robust_mean_est(loads, trim);

  OnePassResult r;
  r.estimate = z / p;
  r.p = p;
  r.buckets = b;
  r.survivor_updates = survivors;
  r.trim = trim;
  return r;
}

// Single-pass constant-factor cardinality estimate, usable as the hint for
// one_pass_f0_robust within the same pass over the data: track the distinct
// items surviving each geometric level, capped per level; the shallowest
// uncapped level scales back up.  Returns estimate/4, i.e. a value in
// [f0/16, f0] whenever the level estimate is within its usual factor-4 band.
inline double constant_factor_hint(std::span<const std::uint64_t> stream,
                                   std::uint64_t seed) {
  constexpr std::size_t kCap = 256;
  const LevelSampler sampler{seed, kSaltStreamHint};
  std::array<std::unordered_set<std::uint64_t>, 65> levels;
  std::array<bool, 65> saturated{};
  for (std::uint64_t x : stream) {
    const int ml = sampler.max_level(x);
    for (int l = 0; l <= ml; ++l) {
      if (saturated[static_cast<std::size_t>(l)]) continue;
      auto& set = levels[static_cast<std::size_t>(l)];
      set.insert(x);
      if (set.size() >= kCap) {
        saturated[static_cast<std::size_t>(l)] = true;
        set.clear();
      }
    }
  }
  for (int l = 0; l <= 64; ++l) {
    if (!saturated[static_cast<std::size_t>(l)]) {
      const double x =
          static_cast<double>(levels[static_cast<std::size_t>(l)].size()) *
          std::exp2(l);
      return std::max(x, 1.0) / 4.0;
    }
  }
  return 1.0;  // unreachable at any realistic scale
}

// ---------------------------------------------------------------------------
// Two-pass estimator over geometric frequency bands.
//
// Pass 1 runs CountSketch over sampled level sets; pass 2 tracks every
// reported heavy candidate exactly.  An item with exact frequency f >= T
// contributes f-1 directly; an item in band l (T/2^l <= f < T/2^(l-1))
// contributes scale_l * (f-1) if and only if it belongs to band l's sample
// — each tracked item contributes in exactly one band, its true band.  The
// output is the update mass of the base level set minus the estimated
// duplicated mass.

// Pairing of per-band sampling rate and rescale factor:
//  - kMatched:  sample at 2^-beta_l, rescale by 2^beta_l (self-consistent,
//    unbiased band estimates; the default),
//  - kSquared:  sample at 2^-(2l-2), rescale by 2^(2*beta_l) (an
//    alternative reading kept behind this flag for comparison).
enum class RateRule { kMatched, kSquared };

struct LevelSetConfig {
  int levels = 1;           // L: number of geometric frequency bands
  double threshold = 0.0;   // T: frequencies >= T are tracked unscaled
  std::uint64_t buckets = 16;  // B: sketch buckets per row
  std::uint32_t rows = 1;      // sketch rows
  double beta_offset = 0.0;    // beta_l = max(0, l - beta_offset)
  RateRule rule = RateRule::kMatched;

  // Defaults for collision-heavy inputs (c_param >= 1/eps).
  static LevelSetConfig for_large_c(std::uint64_t n, double eps,
                                    std::uint64_t c_param) {
    LevelSetConfig cfg;
    const double lg = std::log2(static_cast<double>(n) / eps);
    cfg.levels = std::max(1, static_cast<int>(std::ceil(std::log2(1.0 / eps))) + 4);
    cfg.threshold = (100.0 / (eps * eps)) * lg * lg;
    cfg.buckets = std::max<std::uint64_t>(
        16, static_cast<std::uint64_t>(
                std::ceil(static_cast<double>(c_param) * lg * lg * lg)));
    cfg.rows = std::max<std::uint32_t>(
        1, static_cast<std::uint32_t>(
               std::ceil(4.0 * std::log2(static_cast<double>(n)))));
    cfg.beta_offset =
        std::log2(10.0 * (std::sqrt(static_cast<double>(c_param)) / eps) * lg);
    return cfg;
  }

  // Defaults for collision-light inputs (c_param < 1/eps).
  static LevelSetConfig for_small_c(std::uint64_t n, double eps) {
    LevelSetConfig cfg = for_large_c(n, eps, 0);
    const double lg = std::log2(static_cast<double>(n) / eps);
    cfg.buckets = std::max<std::uint64_t>(
        16,
        static_cast<std::uint64_t>(std::ceil((1.0 / eps) * lg * lg * lg)));
    cfg.beta_offset = std::log2((10.0 / eps) * lg);
    return cfg;
  }
};

struct TwoPassResult {
  double estimate = 0.0;
  std::uint64_t candidates = 0;   // exactly tracked items
  std::uint64_t base_mass = 0;    // update mass of the base level set
  std::uint64_t updates = 0;      // total stream updates per pass
};

namespace detail {

inline std::uint64_t rate_threshold(double rate) {
  if (rate <= 0.0) return 0;
  // rate >= 1 is handled by callers before comparing against this value.
  return static_cast<std::uint64_t>(rate * 18446744073709551616.0);
}

}  // namespace detail

inline TwoPassResult two_pass_core(std::span<const std::uint64_t> pass1,
                                   std::span<const std::uint64_t> pass2,
                                   std::uint64_t seed,
                                   const LevelSetConfig& cfg) {
  if (cfg.levels < 1)
    throw InvalidSpec("two-pass estimator: need at least one frequency band");
  const int levels = cfg.levels;
  std::vector<double> rate(static_cast<std::size_t>(levels) + 1, 1.0);
  std::vector<double> scale(static_cast<std::size_t>(levels) + 1, 1.0);
  for (int l = 1; l <= levels; ++l) {
    const double beta =
        std::max(0.0, static_cast<double>(l) - cfg.beta_offset);
    if (cfg.rule == RateRule::kMatched) {
      rate[static_cast<std::size_t>(l)] = std::exp2(-beta);
      scale[static_cast<std::size_t>(l)] = std::exp2(beta);
    } else {
      rate[static_cast<std::size_t>(l)] = std::exp2(-(2.0 * l - 2.0));
      scale[static_cast<std::size_t>(l)] = std::exp2(2.0 * beta);
    }
  }

  // Levels with equal sampling rate see identical streams and share one
  // sketch.  Rates are non-increasing in l, so member groups of an item
  // form a prefix of the descending-rate order.
  std::vector<double> group_rates;
  std::vector<std::size_t> group_of(static_cast<std::size_t>(levels) + 1, 0);
  for (int l = 1; l <= levels; ++l) {
    const double r = rate[static_cast<std::size_t>(l)];
    if (group_rates.empty() || r != group_rates.back())
      group_rates.push_back(r);
    group_of[static_cast<std::size_t>(l)] = group_rates.size() - 1;
  }
  std::vector<CountSketch> sketches;
  sketches.reserve(group_rates.size());
  for (std::size_t g = 0; g < group_rates.size(); ++g)
    sketches.emplace_back(cfg.rows, static_cast<std::uint32_t>(cfg.buckets),
                          seed);
  std::vector<std::uint64_t> group_thr(group_rates.size());
  for (std::size_t g = 0; g < group_rates.size(); ++g)
    group_thr[g] = detail::rate_threshold(group_rates[g]);
  const auto in_group = [&](std::size_t g, std::uint64_t h) {
    return group_rates[g] >= 1.0 || h < group_thr[g];
  };

  // Pass 1: feed every group's sketch with its sampled sub-stream and
  // measure the base level set's update mass.
  std::uint64_t count1 = 0, base_mass = 0;
  for (std::uint64_t x : pass1) {
    ++count1;
    const std::uint64_t h = hash64(seed, kSaltLevelSets, x);
    for (std::size_t g = 0; g < sketches.size(); ++g) {
      if (!in_group(g, h)) break;
      sketches[g].update(x);
    }
    if (in_group(group_of[1], h)) ++base_mass;
  }

  // Pass 2: admit any item some member sketch estimates above the cut, and
  // track admitted items exactly from their first occurrence.
  const double cut = cfg.threshold / std::exp2(levels);
  std::uint64_t count2 = 0;
  std::unordered_map<std::uint64_t, std::uint64_t> exact;
  std::unordered_set<std::uint64_t> rejected;
  for (std::uint64_t x : pass2) {
    ++count2;
    if (auto it = exact.find(x); it != exact.end()) {
      ++it->second;
      continue;
    }
    if (rejected.count(x)) continue;
    const std::uint64_t h = hash64(seed, kSaltLevelSets, x);
    bool admit = false;
    for (std::size_t g = 0; g < sketches.size() && !admit; ++g) {
      if (!in_group(g, h)) break;
      admit = sketches[g].estimate(x) >= cut;
    }
    if (admit)
      exact.emplace(x, 1);
    else
      rejected.insert(x);
  }
  if (count1 != count2)
    throw PassMismatch("two-pass estimator: pass update counts differ (" +
                       std::to_string(count1) + " vs " +
                       std::to_string(count2) + ")");

  // Band accounting in a deterministic item order (the rescale factors can
  // be non-integer, so the summation order is pinned).
  std::vector<std::pair<std::uint64_t, std::uint64_t>> tracked(exact.begin(),
                                                               exact.end());
  std::sort(tracked.begin(), tracked.end());
  double mhat = 0.0;
  for (const auto& [x, f] : tracked) {
    const auto fd = static_cast<double>(f);
    if (fd >= cfg.threshold) {
      mhat += fd - 1.0;
      continue;
    }
    const int l = static_cast<int>(std::ceil(std::log2(cfg.threshold / fd)));
    if (l < 1 || l > levels) continue;  // below every band: contributes 0
    const double lrate = rate[static_cast<std::size_t>(l)];
    const std::uint64_t h = hash64(seed, kSaltLevelSets, x);
    const bool member = lrate >= 1.0 || h < detail::rate_threshold(lrate);
    if (member) mhat += scale[static_cast<std::size_t>(l)] * (fd - 1.0);
  }

  TwoPassResult r;
  r.estimate = static_cast<double>(base_mass) - mhat;
  r.candidates = tracked.size();
  r.base_mass = base_mass;
  r.updates = count1;
  return r;
}

inline TwoPassResult two_pass_f0(std::span<const std::uint64_t> pass1,
                                 std::span<const std::uint64_t> pass2,
                                 double eps, std::uint64_t c_param,
                                 std::uint64_t n, std::uint64_t seed,
                                 std::optional<LevelSetConfig> cfg = {}) {
  return two_pass_core(pass1, pass2, seed,
                       cfg ? *cfg : LevelSetConfig::for_large_c(n, eps, c_param));
}

inline TwoPassResult two_pass_f0_small(std::span<const std::uint64_t> pass1,
                                       std::span<const std::uint64_t> pass2,
                                       double eps, std::uint64_t n,
                                       std::uint64_t seed,
                                       std::optional<LevelSetConfig> cfg = {}) {
  return two_pass_core(pass1, pass2, seed,
                       cfg ? *cfg : LevelSetConfig::for_small_c(n, eps));
}

}  // namespace fzero
