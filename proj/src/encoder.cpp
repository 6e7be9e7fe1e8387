#include "unlrec/encoder.hpp"

#include "unlrec/errors.hpp"
#include "unlrec/rng.hpp"

namespace unlrec {

InfluenceEncoderState InfluenceEncoderState::init(int nodes, int dim, EncoderHyper hyper,
                                                  std::uint64_t seed) {
  Rng rng(seed);
  InfluenceEncoderState s;
  s.hyper = hyper;
  s.h0 = DenseMatrix::random_uniform(nodes, dim, -1e-3, 1e-3, rng);
  s.weta = DenseMatrix::random_uniform(nodes, 1, -1e-3, 1e-3, rng);
  for (int l = 0; l < hyper.mlp_layers; ++l) {
    s.mlp_w.push_back(DenseMatrix::eye(dim));
    s.mlp_b.push_back(DenseMatrix(1, dim));
  }
  return s;
}

InfluenceEncoderState InfluenceEncoderState::zero_init(int nodes, int dim,
                                                       EncoderHyper hyper) {
  InfluenceEncoderState s;
  s.hyper = hyper;
  s.h0 = DenseMatrix(nodes, dim);
  s.weta = DenseMatrix(nodes, 1);
  for (int l = 0; l < hyper.mlp_layers; ++l) {
    s.mlp_w.push_back(DenseMatrix::eye(dim));
    s.mlp_b.push_back(DenseMatrix(1, dim));
  }
  return s;
}

DenseMatrix propagate_iem(const InfluenceEncoderState& s, const SparseSymMatrix& idm_norm) {
  GradientTape tape;
  auto out = tape_iem(tape, tape.constant(s.h0), idm_norm, s.hyper.iem_layers);
  return tape.value(out.h_bar);
}

DenseMatrix propagate_weighted(const InfluenceEncoderState& s,
                               const SparseSymMatrix& idm_norm,
                               const DenseMatrix& frozen_readout) {
  GradientTape tape;
  ValueId out = tape_weighted(tape, tape.constant(s.weta), idm_norm,
                              tape.constant(frozen_readout), s.hyper.weighted_layers);
  return tape.value(out);
}

DenseMatrix mlp_forward(const InfluenceEncoderState& s, const DenseMatrix& x) {
  GradientTape tape;
  EncoderLeaves leaves = make_encoder_leaves(tape, s, false, false);
  return tape.value(tape_mlp(tape, leaves, tape.constant(x)));
}

DenseMatrix encode(const InfluenceEncoderState& s, const UnlearnRequest& req,
                   const DenseMatrix& e0, const DenseMatrix& frozen_readout) {
  GradientTape tape;
  EncoderLeaves leaves = make_encoder_leaves(tape, s, false, false);
  auto out = tape_encode(tape, leaves, s.hyper, req.idm_norm,
                         tape.constant(frozen_readout), tape.constant(e0));
  return tape.value(out.e0_tilde);
}

EncoderLeaves make_encoder_leaves(GradientTape& tape, const InfluenceEncoderState& s,
                                  bool train_h0_weta, bool train_mlp) {
  EncoderLeaves leaves;
  leaves.h0 = train_h0_weta ? tape.trainable(s.h0) : tape.constant(s.h0);
  leaves.weta = train_h0_weta ? tape.trainable(s.weta) : tape.constant(s.weta);
  for (std::size_t l = 0; l < s.mlp_w.size(); ++l) {
    leaves.mlp_w.push_back(train_mlp ? tape.trainable(s.mlp_w[l])
                                     : tape.constant(s.mlp_w[l]));
    leaves.mlp_b.push_back(train_mlp ? tape.trainable(s.mlp_b[l])
                                     : tape.constant(s.mlp_b[l]));
  }
  return leaves;
}

TapeIemOut tape_iem(GradientTape& tape, ValueId h0, const SparseSymMatrix& idm_norm,
                    int iem_layers) {
  if (iem_layers < 1) throw ContractError("tape_iem: iem_layers must be >= 1");
  ValueId layer = h0;
  ValueId acc = h0;
  for (int l = 1; l < iem_layers; ++l) {
    layer = tape.spmm(idm_norm, layer);
    acc = tape.add(acc, layer);
  }
  return {acc, layer};
}

ValueId tape_weighted(GradientTape& tape, ValueId weta, const SparseSymMatrix& idm_norm,
                      ValueId frozen_readout, int weighted_layers) {
  if (weighted_layers < 1) throw ContractError("tape_weighted: weighted_layers must be >= 1");
  ValueId layer = tape.row_scale(frozen_readout, weta);
  for (int l = 1; l < weighted_layers; ++l) layer = tape.spmm(idm_norm, layer);
  return layer;
}

ValueId tape_mlp(GradientTape& tape, const EncoderLeaves& leaves, ValueId x) {
  const int n_layers = static_cast<int>(leaves.mlp_w.size());
  ValueId cur = x;
  for (int l = 0; l < n_layers; ++l) {
    cur = tape.add_rowvec(tape.matmul_nt(cur, leaves.mlp_w[l]), leaves.mlp_b[l]);
    if (l + 1 < n_layers) cur = tape.leaky_relu(cur, kMlpLeakySlope);
  }
  return cur;
}

TapeEncodeOut tape_encode(GradientTape& tape, const EncoderLeaves& leaves,
                          const EncoderHyper& hyper, const SparseSymMatrix& idm_norm,
                          ValueId frozen_readout, ValueId e0) {
  TapeIemOut iem = tape_iem(tape, leaves.h0, idm_norm, hyper.iem_layers);
  ValueId ew = tape_weighted(tape, leaves.weta, idm_norm, frozen_readout,
                             hyper.weighted_layers);
  ValueId delta = tape.sub(iem.h_bar, ew);  // -E_w + H_bar
  ValueId shifted = tape_mlp(tape, leaves, delta);
  ValueId e0_tilde = tape.add(shifted, e0);
  return {e0_tilde, iem.h_last, delta};
}

}  // namespace unlrec
