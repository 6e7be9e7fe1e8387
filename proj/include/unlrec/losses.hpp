#pragma once

#include <cstdint>
#include <vector>

#include "unlrec/backbone.hpp"
#include "unlrec/encoder.hpp"
#include "unlrec/graph.hpp"
#include "unlrec/matrix.hpp"
#include "unlrec/tape.hpp"

namespace unlrec {

struct LossWeights {
  double lambda_u = 0.5;
  double lambda_p = 0.01;
  double lambda_c = 1e-3;
  double tau_p = 1.0;
  double tau_c = 1.0;
  double dropout_rho = 0.1;  // IDM edge dropout fraction for the contrast loss
};

// Sum over unlearned pairs of -log sigm(-dot of revised readout rows).
// Empty delta set contributes 0.
double unlearning_loss(const DenseMatrix& readout, const std::vector<Edge>& delta,
                       int user_count);
ValueId tape_unlearning_loss(GradientTape& tape, ValueId readout,
                             const std::vector<Edge>& delta, int user_count);

// Per-pair in-batch log-softmax of readout dot products: component b is
// log( exp(d_bb/tau) / sum_k exp(d_bk/tau) ) over the batch's positive items.
std::vector<double> psi(const DenseMatrix& readout, const std::vector<Edge>& pairs,
                        double tau, int user_count);
ValueId tape_psi(GradientTape& tape, ValueId readout, const std::vector<Edge>& pairs,
                 double tau, int user_count);

// Squared L2 distance between the two distribution vectors.
double preserving_loss(const std::vector<double>& psi_new,
                       const std::vector<double>& psi_old);
ValueId tape_preserving_loss(GradientTape& tape, ValueId psi_new,
                             const std::vector<double>& psi_old);

// Removes ceil(rho * |E_delta|) unlearning edges (never all of them) and
// returns the renormalized dropped IDM plus the surviving edges.
struct IdmDropout {
  std::vector<Edge> kept_edges;
  SparseSymMatrix idm_norm;
};
IdmDropout idm_dropout(const std::vector<Edge>& delta_edges, int user_count,
                       int item_count, double rho, Rng& rng);

// Same-index cosine alignment of the final IEM layers under the full and the
// dropped IDM; denominator runs over all nodes' own pairs.
double contrast_loss(const DenseMatrix& h, const DenseMatrix& h_dropped, double tau);
ValueId tape_contrast_loss(GradientTape& tape, ValueId h, ValueId h_dropped, double tau);

// The combined pre-training objective L = L_M + lu*L_u + lp*L_p + lc*L_c,
// evaluated on Model(encode(...), residual adjacency). Components with zero
// weight are not built.
struct TotalLossResult {
  ValueId loss = -1;
  double total = 0.0;
  double model_part = 0.0;
  double unlearn_part = 0.0;
  double preserve_part = 0.0;
  double contrast_part = 0.0;
};

TotalLossResult build_total_loss(GradientTape& tape, const BackboneConfig& backbone,
                                 const EncoderHyper& hyper, const EncoderLeaves& leaves,
                                 ValueId e0, const DenseMatrix& frozen_readout,
                                 const UnlearnRequest& request, const LossWeights& weights,
                                 const BprBatch& batch, int user_count, int item_count,
                                 Rng& rng);

// Convenience scalar evaluation (builds a throwaway tape).
double total_loss(const BackboneConfig& backbone, const InfluenceEncoderState& encoder,
                  const DenseMatrix& e0, const DenseMatrix& frozen_readout,
                  const UnlearnRequest& request, const LossWeights& weights,
                  const BprBatch& batch, int user_count, int item_count,
                  std::uint64_t seed);

}  // namespace unlrec
