#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "fzero/errors.hpp"
#include "fzero/hash.hpp"

// Signed-counter frequency sketch: r rows of b buckets.  Each row hashes an
// item to one bucket and a +/-1 sign; the frequency estimate is the median
// over rows of sign * bucket.  The structure is linear: merging two
// sketches of streams x and y (same shape, same seed) gives the sketch of
// the concatenated stream, so estimates add.
//
// With the b largest-magnitude frequencies y removed from the input vector,
// the per-item error is bounded by ||tail||_2 / sqrt(b) with constant
// probability per row; the median over rows makes that hold for all items
// simultaneously with high probability.

namespace fzero {

class CountSketch {
 public:
  CountSketch(std::uint32_t rows, std::uint32_t buckets, std::uint64_t seed)
      : rows_(rows), buckets_(buckets), seed_(seed) {
    if (rows == 0 || buckets == 0)
      throw InvalidSpec("CountSketch needs at least one row and one bucket");
    table_.assign(static_cast<std::size_t>(rows) * buckets, 0);
  }

  std::uint32_t rows() const { return rows_; }
  std::uint32_t buckets() const { return buckets_; }
  std::uint64_t seed() const { return seed_; }

  void update(std::uint64_t item, std::int64_t delta = 1) {
    for (std::uint32_t r = 0; r < rows_; ++r)
      table_[static_cast<std::size_t>(r) * buckets_ + bucket_of(item, r)] +=
          sign_of(item, r) * delta;
  }

  // Signed per-row estimate; exact when no other item shares the bucket.
  std::int64_t row_estimate(std::uint64_t item, std::uint32_t r) const {
    return sign_of(item, r) *
           table_[static_cast<std::size_t>(r) * buckets_ + bucket_of(item, r)];
  }

  // Median over rows (mean of the two central values for even row counts).
  double estimate(std::uint64_t item) const {
    std::vector<std::int64_t> vals(rows_);
    for (std::uint32_t r = 0; r < rows_; ++r) vals[r] = row_estimate(item, r);
    std::sort(vals.begin(), vals.end());
    if (rows_ % 2 == 1) return static_cast<double>(vals[rows_ / 2]);
    return 0.5 * (static_cast<double>(vals[rows_ / 2 - 1]) +
                  static_cast<double>(vals[rows_ / 2]));
  }

  CountSketch& operator+=(const CountSketch& other) {
    if (rows_ != other.rows_ || buckets_ != other.buckets_ ||
        seed_ != other.seed_)
      throw InvalidSpec("CountSketch merge requires identical shape and seed");
    for (std::size_t k = 0; k < table_.size(); ++k)
      table_[k] += other.table_[k];
    return *this;
  }

  bool operator==(const CountSketch& other) const {
    return rows_ == other.rows_ && buckets_ == other.buckets_ &&
           seed_ == other.seed_ && table_ == other.table_;
  }

 private:
  std::uint32_t bucket_of(std::uint64_t item, std::uint32_t r) const {
    return static_cast<std::uint32_t>(
        hash64(seed_, kSaltSketchBucket + kGoldenGamma * r, item) % buckets_);
  }

  std::int64_t sign_of(std::uint64_t item, std::uint32_t r) const {
    return (hash64(seed_, kSaltSketchSign + kGoldenGamma * r, item) & 1) ? 1
                                                                         : -1;
  }

  std::uint32_t rows_;
  std::uint32_t buckets_;
  std::uint64_t seed_;
  std::vector<std::int64_t> table_;
};

}  // namespace fzero
