#pragma once

#include <stdexcept>
#include <string>

namespace fzero {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dataset construction / validation failures (unsorted shard, duplicate id,
// id out of range, universe too large).
struct InvalidDataset : Error {
  using Error::Error;
};

// A protocol was run on a dataset holding no items at all.
struct EmptyDataset : Error {
  using Error::Error;
};

// robust_mean_est on an empty sample set.
struct EmptyInput : Error {
  using Error::Error;
};

// robust_mean_est with a trim fraction outside [0, 0.5).
struct InvalidTrim : Error {
  using Error::Error;
};

// one_pass_f0_robust with a non-positive cardinality hint.
struct InvalidHint : Error {
  using Error::Error;
};

// The two passes of a two-pass estimator saw different update counts.
struct PassMismatch : Error {
  using Error::Error;
};

// Text input could not be parsed; message carries the 1-based line number.
struct ParseError : Error {
  using Error::Error;
};

// An input file contained no records.
struct EmptyFile : Error {
  using Error::Error;
};

// A generator or experiment spec is internally inconsistent.
struct InvalidSpec : Error {
  using Error::Error;
};

// fit_zipf input with fewer than two positive counts.
struct DegenerateInput : Error {
  using Error::Error;
};

}  // namespace fzero
