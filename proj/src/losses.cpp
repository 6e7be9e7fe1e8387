#include "unlrec/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "unlrec/errors.hpp"

namespace unlrec {

ValueId tape_unlearning_loss(GradientTape& tape, ValueId readout,
                             const std::vector<Edge>& delta, int user_count) {
  if (delta.empty()) return tape.constant(DenseMatrix(1, 1));
  std::vector<int> users, items;
  users.reserve(delta.size());
  items.reserve(delta.size());
  for (const auto& e : delta) {
    users.push_back(e.user);
    items.push_back(user_count + e.item);
  }
  ValueId u = tape.gather_rows(readout, users);
  ValueId i = tape.gather_rows(readout, items);
  ValueId neg_dots = tape.scale(tape.rowwise_dot(u, i), -1.0);
  return tape.scale(tape.sum(tape.log_sigmoid(neg_dots)), -1.0);
}

double unlearning_loss(const DenseMatrix& readout, const std::vector<Edge>& delta,
                       int user_count) {
  GradientTape tape;
  return tape.scalar(
      tape_unlearning_loss(tape, tape.constant(readout), delta, user_count));
}

ValueId tape_psi(GradientTape& tape, ValueId readout, const std::vector<Edge>& pairs,
                 double tau, int user_count) {
  if (pairs.empty()) throw ContractError("psi: empty pair batch");
  if (tau <= 0.0) throw ContractError("psi: tau must be positive");
  std::vector<int> users, items;
  users.reserve(pairs.size());
  items.reserve(pairs.size());
  for (const auto& e : pairs) {
    users.push_back(e.user);
    items.push_back(user_count + e.item);
  }
  ValueId u = tape.gather_rows(readout, users);
  ValueId p = tape.gather_rows(readout, items);
  ValueId dots = tape.scale(tape.matmul_nt(u, p), 1.0 / tau);
  return tape.sub(tape.diag(dots), tape.logsumexp_rows(dots));
}

std::vector<double> psi(const DenseMatrix& readout, const std::vector<Edge>& pairs,
                        double tau, int user_count) {
  if (pairs.empty()) throw ContractError("psi: empty pair batch");
  if (tau <= 0.0) throw ContractError("psi: tau must be positive");
  const int b = static_cast<int>(pairs.size());
  const int d = readout.cols;
  std::vector<double> out(b);
  std::vector<double> row(b);
  for (int i = 0; i < b; ++i) {
    const double* u = readout.row(pairs[i].user);
    double m = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < b; ++j) {
      const double* p = readout.row(user_count + pairs[j].item);
      double s = 0.0;
      for (int k = 0; k < d; ++k) s += u[k] * p[k];
      row[j] = s / tau;
      m = std::max(m, row[j]);
    }
    double lse = 0.0;
    for (int j = 0; j < b; ++j) lse += std::exp(row[j] - m);
    out[i] = row[i] - (m + std::log(lse));
  }
  return out;
}

ValueId tape_preserving_loss(GradientTape& tape, ValueId psi_new,
                             const std::vector<double>& psi_old) {
  const DenseMatrix& nv = tape.value(psi_new);
  if (nv.cols != 1 || static_cast<std::size_t>(nv.rows) != psi_old.size())
    throw ShapeError("preserving_loss: psi length mismatch");
  DenseMatrix old(nv.rows, 1);
  old.v = psi_old;
  ValueId diff = tape.sub(psi_new, tape.constant(std::move(old)));
  return tape.sum(tape.mul(diff, diff));
}

double preserving_loss(const std::vector<double>& psi_new,
                       const std::vector<double>& psi_old) {
  if (psi_new.size() != psi_old.size())
    throw ShapeError("preserving_loss: psi length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < psi_new.size(); ++i) {
    const double d = psi_new[i] - psi_old[i];
    s += d * d;
  }
  return s;
}

IdmDropout idm_dropout(const std::vector<Edge>& delta_edges, int user_count,
                       int item_count, double rho, Rng& rng) {
  if (rho < 0.0 || rho >= 1.0) throw ContractError("idm_dropout: rho must be in [0,1)");
  IdmDropout out;
  out.kept_edges = delta_edges;
  if (!delta_edges.empty() && rho > 0.0) {
    auto remove = static_cast<std::size_t>(
        std::ceil(rho * static_cast<double>(delta_edges.size())));
    remove = std::min(remove, delta_edges.size() - 1);  // keep at least one edge
    rng.shuffle(out.kept_edges);
    out.kept_edges.resize(delta_edges.size() - remove);
    std::sort(out.kept_edges.begin(), out.kept_edges.end());
  }
  const int dim = user_count + item_count;
  std::vector<int> degree(dim, 0);
  for (const auto& e : out.kept_edges) {
    degree[e.user]++;
    degree[user_count + e.item]++;
  }
  std::vector<std::pair<int, int>> pairs;
  std::vector<double> w;
  for (const auto& e : out.kept_edges) {
    pairs.emplace_back(e.user, user_count + e.item);
    w.push_back(1.0 / std::sqrt(static_cast<double>(degree[e.user]) *
                                degree[user_count + e.item]));
  }
  out.idm_norm = SparseSymMatrix::from_undirected(dim, pairs, w);
  return out;
}

ValueId tape_contrast_loss(GradientTape& tape, ValueId h, ValueId h_dropped, double tau) {
  if (tau <= 0.0) throw ContractError("contrast_loss: tau must be positive");
  const DenseMatrix& hv = tape.value(h);
  if (!hv.same_shape(tape.value(h_dropped)))
    throw ShapeError("contrast_loss: shape mismatch");
  ValueId n1 = tape.row_normalize(h);
  ValueId n2 = tape.row_normalize(h_dropped);
  ValueId cs = tape.scale(tape.rowwise_dot(n1, n2), 1.0 / tau);  // N x 1
  // sum_i [ logsumexp(cs) - cs_i ] = N * logsumexp(cs) - sum(cs)
  ValueId lse = tape.logsumexp_rows(tape.transposed(cs));
  return tape.sub(tape.scale(lse, static_cast<double>(hv.rows)), tape.sum(cs));
}

double contrast_loss(const DenseMatrix& h, const DenseMatrix& h_dropped, double tau) {
  GradientTape tape;
  return tape.scalar(
      tape_contrast_loss(tape, tape.constant(h), tape.constant(h_dropped), tau));
}

TotalLossResult build_total_loss(GradientTape& tape, const BackboneConfig& backbone,
                                 const EncoderHyper& hyper, const EncoderLeaves& leaves,
                                 ValueId e0, const DenseMatrix& frozen_readout,
                                 const UnlearnRequest& request, const LossWeights& weights,
                                 const BprBatch& batch, int user_count, int item_count,
                                 Rng& rng) {
  TotalLossResult res;
  ValueId frozen = tape.constant(frozen_readout);
  TapeEncodeOut enc = tape_encode(tape, leaves, hyper, request.idm_norm, frozen, e0);

  // revised readout shared by the model, unlearning and preserving terms
  ValueId revised = tape_readout(tape, enc.e0_tilde, request.residual_adj, backbone.layers);
  ValueId loss = tape_model_loss_with_readout(tape, backbone, enc.e0_tilde, revised,
                                              request.residual_edges, user_count,
                                              item_count, batch, rng);
  res.model_part = tape.scalar(loss);

  if (weights.lambda_u != 0.0) {
    ValueId lu = tape_unlearning_loss(tape, revised, request.delta_edges, user_count);
    res.unlearn_part = tape.scalar(lu);
    loss = tape.add(loss, tape.scale(lu, weights.lambda_u));
  }
  if (weights.lambda_p != 0.0) {
    std::vector<Edge> pairs;
    pairs.reserve(batch.size());
    for (std::size_t k = 0; k < batch.size(); ++k)
      pairs.push_back({batch.users[k], batch.pos_items[k] - user_count});
    const std::vector<double> psi_old = psi(frozen_readout, pairs, weights.tau_p, user_count);
    ValueId psi_new = tape_psi(tape, revised, pairs, weights.tau_p, user_count);
    ValueId lp = tape_preserving_loss(tape, psi_new, psi_old);
    res.preserve_part = tape.scalar(lp);
    loss = tape.add(loss, tape.scale(lp, weights.lambda_p));
  }
  if (weights.lambda_c != 0.0) {
    IdmDropout dropped = idm_dropout(request.delta_edges, user_count, item_count,
                                     weights.dropout_rho, rng);
    const SparseSymMatrix& dropped_idm = tape.own_sparse(std::move(dropped.idm_norm));
    TapeIemOut iem_dropped = tape_iem(tape, leaves.h0, dropped_idm, hyper.iem_layers);
    ValueId lc = tape_contrast_loss(tape, enc.h_last, iem_dropped.h_last, weights.tau_c);
    res.contrast_part = tape.scalar(lc);
    loss = tape.add(loss, tape.scale(lc, weights.lambda_c));
  }

  res.loss = loss;
  res.total = tape.scalar(loss);
  return res;
}

double total_loss(const BackboneConfig& backbone, const InfluenceEncoderState& encoder,
                  const DenseMatrix& e0, const DenseMatrix& frozen_readout,
                  const UnlearnRequest& request, const LossWeights& weights,
                  const BprBatch& batch, int user_count, int item_count,
                  std::uint64_t seed) {
  GradientTape tape;
  Rng rng(seed);
  EncoderLeaves leaves = make_encoder_leaves(tape, encoder, false, false);
  return build_total_loss(tape, backbone, encoder.hyper, leaves, tape.constant(e0),
                          frozen_readout, request, weights, batch, user_count, item_count,
                          rng)
      .total;
}

}  // namespace unlrec
