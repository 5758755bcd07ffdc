#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "fzero/errors.hpp"

namespace fzero {

// Two-sided trimmed mean: drop the k = ceil(trim * n) smallest and largest
// samples and average the rest (k is reduced if necessary so at least one
// sample survives).  trim = 0 is the exact arithmetic mean.
//
// This is the single interface point for robust location estimation; a
// heavier estimator can be swapped in behind the same signature.  For the
// bucket statistics used here the contamination is one-sided (a corrupted
// bucket is inflated), and a symmetric trim at a fraction comfortably above
// the contamination rate removes it.
inline double robust_mean_est(std::span<const double> samples, double trim) {
  if (samples.empty()) throw EmptyInput("robust_mean_est: no samples");
  if (!(trim >= 0.0) || trim >= 0.5)
    throw InvalidTrim("robust_mean_est: trim must lie in [0, 0.5)");
  const std::size_t n = samples.size();
  auto k = static_cast<std::size_t>(std::ceil(trim * static_cast<double>(n)));
  k = std::min(k, (n - 1) / 2);
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (std::size_t i = k; i < n - k; ++i) sum += sorted[i];
  return sum / static_cast<double>(n - 2 * k);
}

}  // namespace fzero
