#include "unlrec/adam.hpp"

#include <cmath>

#include "unlrec/errors.hpp"

namespace unlrec {

int AdamState::register_param(const std::string& name, int rows, int cols) {
  m.emplace_back(rows, cols);
  v.emplace_back(rows, cols);
  names.push_back(name);
  return static_cast<int>(m.size() - 1);
}

void adam_step(AdamState& state, const std::vector<DenseMatrix*>& params,
               const std::vector<const DenseMatrix*>& grads) {
  if (params.size() != state.m.size() || grads.size() != state.m.size())
    throw ShapeError("adam_step: expected " + std::to_string(state.m.size()) +
                     " params/grads");
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (!params[p]->same_shape(state.m[p]))
      throw ShapeError("adam_step: param shape mismatch for " + state.names[p]);
    if (!grads[p]->same_shape(state.m[p]))
      throw ShapeError("adam_step: grad shape mismatch for " + state.names[p]);
  }

  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));

  for (std::size_t p = 0; p < params.size(); ++p) {
    DenseMatrix& x = *params[p];
    const DenseMatrix& g = *grads[p];
    DenseMatrix& m1 = state.m[p];
    DenseMatrix& m2 = state.v[p];
    for (std::size_t k = 0; k < x.v.size(); ++k) {
      const double gk = g.v[k];
      if (!std::isfinite(gk))
        throw NumericError("adam_step: non-finite gradient in " + state.names[p] +
                           " at flat index " + std::to_string(k) + " (step " +
                           std::to_string(state.step) + ")");
      m1.v[k] = state.beta1 * m1.v[k] + (1.0 - state.beta1) * gk;
      m2.v[k] = state.beta2 * m2.v[k] + (1.0 - state.beta2) * gk * gk;
      const double mhat = m1.v[k] / bc1;
      const double vhat = m2.v[k] / bc2;
      x.v[k] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

}  // namespace unlrec
