#pragma once

#include <cstdint>
#include <vector>

#include "unlrec/graph.hpp"
#include "unlrec/matrix.hpp"
#include "unlrec/tape.hpp"

namespace unlrec {

struct EncoderHyper {
  int iem_layers = 3;      // L_u: propagation depth of the influence matrix
  int weighted_layers = 3; // L_e: propagation depth of the weighted readout
  int mlp_layers = 2;      // L_m
};

// The pre-trainable influence encoder. h0 and weta are the pre-training
// parameters; the MLP is frozen at identity until fine-tuning.
struct InfluenceEncoderState {
  DenseMatrix h0;                  // (I+J) x d
  DenseMatrix weta;                // (I+J) x 1
  std::vector<DenseMatrix> mlp_w;  // L_m matrices, d x d
  std::vector<DenseMatrix> mlp_b;  // L_m row vectors, 1 x d
  EncoderHyper hyper;

  int node_count() const { return h0.rows; }
  int dim() const { return h0.cols; }

  // h0, weta ~ uniform(-1e-3, 1e-3); MLP weights identity, biases zero.
  static InfluenceEncoderState init(int nodes, int dim, EncoderHyper hyper,
                                    std::uint64_t seed);
  // Exact zeros for h0/weta; identity MLP. The no-op fixed point.
  static InfluenceEncoderState zero_init(int nodes, int dim, EncoderHyper hyper);
};

// Hidden layers use a leaky rectifier with negative slope 0.5; the final
// layer is linear. MLP(0) == 0 and the identity-initialized MLP maps
// nonnegative inputs to themselves.
inline constexpr double kMlpLeakySlope = 0.5;

// H_l = idmNorm * H_{l-1}; returns the sum over layers 0..L_u-1.
DenseMatrix propagate_iem(const InfluenceEncoderState& s, const SparseSymMatrix& idm_norm);

// E_w0 = readout ⊙ weta (row broadcast); E_wl = idmNorm * E_w,l-1; returns
// the last layer E_w,L_e-1.
DenseMatrix propagate_weighted(const InfluenceEncoderState& s,
                               const SparseSymMatrix& idm_norm,
                               const DenseMatrix& frozen_readout);

DenseMatrix mlp_forward(const InfluenceEncoderState& s, const DenseMatrix& x);

// Revised layer-0 embeddings: MLP(-E_w + H_bar) + e0.
DenseMatrix encode(const InfluenceEncoderState& s, const UnlearnRequest& req,
                   const DenseMatrix& e0, const DenseMatrix& frozen_readout);

// ---- tape variants ----

struct EncoderLeaves {
  ValueId h0 = -1;
  ValueId weta = -1;
  std::vector<ValueId> mlp_w;
  std::vector<ValueId> mlp_b;
};

// train_h0_weta: pre-training mode; train_mlp: fine-tuning mode.
EncoderLeaves make_encoder_leaves(GradientTape& tape, const InfluenceEncoderState& s,
                                  bool train_h0_weta, bool train_mlp);

struct TapeIemOut {
  ValueId h_bar;   // sum over layers
  ValueId h_last;  // final propagated layer (contrast loss input)
};
TapeIemOut tape_iem(GradientTape& tape, ValueId h0, const SparseSymMatrix& idm_norm,
                    int iem_layers);

ValueId tape_weighted(GradientTape& tape, ValueId weta, const SparseSymMatrix& idm_norm,
                      ValueId frozen_readout, int weighted_layers);

ValueId tape_mlp(GradientTape& tape, const EncoderLeaves& leaves, ValueId x);

struct TapeEncodeOut {
  ValueId e0_tilde;
  ValueId h_last;
  ValueId delta_e0;  // pre-MLP shift
};
TapeEncodeOut tape_encode(GradientTape& tape, const EncoderLeaves& leaves,
                          const EncoderHyper& hyper, const SparseSymMatrix& idm_norm,
                          ValueId frozen_readout, ValueId e0);

}  // namespace unlrec
