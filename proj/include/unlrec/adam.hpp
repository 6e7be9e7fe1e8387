#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "unlrec/matrix.hpp"

namespace unlrec {

// Adam with bias correction. One state instance covers a fixed set of
// parameters; moments are allocated on registration and the step counter is
// shared (one increment per optimizer step).
struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step = 0;
  std::vector<DenseMatrix> m;
  std::vector<DenseMatrix> v;
  std::vector<std::string> names;

  explicit AdamState(double learning_rate = 1e-3) : lr(learning_rate) {}

  int register_param(const std::string& name, int rows, int cols);
};

// In-place update of params given grads (parallel arrays in registration
// order). Throws NumericError naming the offending parameter on NaN/Inf
// gradients.
void adam_step(AdamState& state, const std::vector<DenseMatrix*>& params,
               const std::vector<const DenseMatrix*>& grads);

}  // namespace unlrec
