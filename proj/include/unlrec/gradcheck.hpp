#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "unlrec/matrix.hpp"

namespace unlrec {

// Central-difference verification of an analytic gradient. Report-only: the
// caller decides what to do with failures.
//
// Coordinates where the two one-sided difference quotients disagree strongly
// are treated as sitting on a non-smooth point of the loss (e.g. an activation
// input of exactly 0) and are skipped rather than failed.
struct GradCheckCoord {
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_err = 0.0;
  bool skipped = false;
  std::string note;
};

struct GradCheckReport {
  std::vector<GradCheckCoord> coords;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  double max_rel_err = 0.0;
  double tolerance = 0.0;

  bool pass() const { return max_rel_err <= tolerance; }
  std::string summary() const;
};

struct GradCheckOptions {
  double h = 1e-4;
  double tolerance = 1e-4;
  // 0 = every coordinate; otherwise a deterministic sample of this many.
  std::size_t max_coords = 0;
  std::uint64_t seed = 1;
};

// lossFn must be deterministic for a fixed RNG seed baked into the closure.
// analytic is the gradient of lossFn at `param`.
GradCheckReport finite_diff_check(const std::function<double(const DenseMatrix&)>& lossFn,
                                  const DenseMatrix& param, const DenseMatrix& analytic,
                                  const GradCheckOptions& opts = {});

}  // namespace unlrec
