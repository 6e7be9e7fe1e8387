#include "unlrec/backbone.hpp"

#include <algorithm>
#include <cmath>

#include "unlrec/errors.hpp"

namespace unlrec {

BackboneKind backbone_kind_from_string(const std::string& s) {
  if (s == "lightgcn") return BackboneKind::kLightGCN;
  if (s == "sgl-ed") return BackboneKind::kSglEd;
  if (s == "simgcl") return BackboneKind::kSimGCL;
  throw ParseError("unknown backbone kind: " + s);
}

std::string to_string(BackboneKind k) {
  switch (k) {
    case BackboneKind::kLightGCN: return "lightgcn";
    case BackboneKind::kSglEd: return "sgl-ed";
    case BackboneKind::kSimGCL: return "simgcl";
  }
  return "?";
}

EmbeddingState forward(const DenseMatrix& e0, const SparseSymMatrix& norm_adj, int layers) {
  if (e0.rows != norm_adj.dim())
    throw ShapeError("forward: e0 rows " + std::to_string(e0.rows) + " vs adjacency dim " +
                     std::to_string(norm_adj.dim()));
  if (layers < 1) throw ContractError("forward: layers must be >= 1");
  EmbeddingState s;
  s.e0 = e0;
  s.per_layer.reserve(layers);
  s.per_layer.push_back(e0);
  for (int l = 1; l < layers; ++l) s.per_layer.push_back(norm_adj.multiply(s.per_layer.back()));
  s.readout = s.per_layer[0];
  for (int l = 1; l < layers; ++l) add_into(s.readout, s.per_layer[l]);
  return s;
}

DenseMatrix predict_scores(const EmbeddingState& state, const std::vector<int>& rows_a,
                           const std::vector<int>& rows_b) {
  const DenseMatrix& r = state.readout;
  for (int i : rows_a)
    if (i < 0 || i >= r.rows) throw ShapeError("predict_scores: row id out of range");
  for (int j : rows_b)
    if (j < 0 || j >= r.rows) throw ShapeError("predict_scores: row id out of range");
  DenseMatrix out(static_cast<int>(rows_a.size()), static_cast<int>(rows_b.size()));
  for (std::size_t i = 0; i < rows_a.size(); ++i) {
    const double* ra = r.row(rows_a[i]);
    for (std::size_t j = 0; j < rows_b.size(); ++j) {
      const double* rb = r.row(rows_b[j]);
      double s = 0.0;
      for (int k = 0; k < r.cols; ++k) s += ra[k] * rb[k];
      out.at(static_cast<int>(i), static_cast<int>(j)) = s;
    }
  }
  return out;
}

double score_pair(const EmbeddingState& state, int node_a, int node_b) {
  const DenseMatrix& r = state.readout;
  const double* a = r.row(node_a);
  const double* b = r.row(node_b);
  double s = 0.0;
  for (int k = 0; k < r.cols; ++k) s += a[k] * b[k];
  return s;
}

BprBatch sample_bpr_batch(const InteractionGraph& interactions, int batch_size, Rng& rng) {
  BprBatch batch;
  batch.users.reserve(batch_size);
  batch.pos_items.reserve(batch_size);
  batch.neg_items.reserve(batch_size);
  for (int k = 0; k < batch_size; ++k) {
    const Edge& e = interactions.edges[rng.index(interactions.edges.size())];
    batch.users.push_back(e.user);
    batch.pos_items.push_back(interactions.item_node(e.item));
    batch.neg_items.push_back(
        interactions.item_node(sample_negatives(interactions, e.user, 1, rng)[0]));
  }
  return batch;
}

BprBatch batch_from_slice(const InteractionGraph& interactions,
                          const std::vector<Edge>& order, std::size_t begin,
                          std::size_t len, Rng& rng) {
  BprBatch batch;
  batch.users.reserve(len);
  batch.pos_items.reserve(len);
  batch.neg_items.reserve(len);
  for (std::size_t k = begin; k < begin + len; ++k) {
    const Edge& e = order[k];
    batch.users.push_back(e.user);
    batch.pos_items.push_back(interactions.item_node(e.item));
    batch.neg_items.push_back(
        interactions.item_node(sample_negatives(interactions, e.user, 1, rng)[0]));
  }
  return batch;
}

ValueId tape_readout(GradientTape& tape, ValueId e0, const SparseSymMatrix& norm_adj,
                     int layers) {
  if (layers < 1) throw ContractError("tape_readout: layers must be >= 1");
  ValueId layer = e0;
  ValueId acc = e0;
  for (int l = 1; l < layers; ++l) {
    layer = tape.spmm(norm_adj, layer);
    acc = tape.add(acc, layer);
  }
  return acc;
}

ValueId tape_bpr_loss(GradientTape& tape, ValueId readout, const BprBatch& batch) {
  ValueId u = tape.gather_rows(readout, batch.users);
  ValueId p = tape.gather_rows(readout, batch.pos_items);
  ValueId n = tape.gather_rows(readout, batch.neg_items);
  ValueId diff = tape.sub(tape.rowwise_dot(u, p), tape.rowwise_dot(u, n));
  return tape.scale(tape.sum(tape.log_sigmoid(diff)), -1.0);
}

double bpr_loss(const EmbeddingState& state, const BprBatch& batch) {
  GradientTape tape;
  ValueId r = tape.constant(state.readout);
  return tape.scalar(tape_bpr_loss(tape, r, batch));
}

std::vector<Edge> sgl_edge_drop(const std::vector<Edge>& edges, double rate, Rng& rng) {
  const auto drop = static_cast<std::size_t>(
      std::llround(rate * static_cast<double>(edges.size())));
  std::vector<Edge> keep = edges;
  rng.shuffle(keep);
  keep.resize(edges.size() - std::min(drop, edges.size()));
  std::sort(keep.begin(), keep.end());
  return keep;
}

namespace {

// One SimGCL view: each propagated layer contribution gets sign-aligned
// uniform noise in [0, eps); the noise is a constant w.r.t. the tape.
ValueId simgcl_view(GradientTape& tape, ValueId e0, const SparseSymMatrix& adj, int layers,
                    double eps, Rng& rng) {
  ValueId layer = e0;
  ValueId acc = e0;
  for (int l = 1; l < layers; ++l) {
    layer = tape.spmm(adj, layer);
    const DenseMatrix& lv = tape.value(layer);
    DenseMatrix noise(lv.rows, lv.cols);
    for (std::size_t k = 0; k < lv.v.size(); ++k)
      noise.v[k] = (lv.v[k] >= 0.0 ? 1.0 : -1.0) * rng.uniform(0.0, eps);
    ValueId noisy = tape.add(layer, tape.constant(std::move(noise)));
    acc = tape.add(acc, noisy);
  }
  return acc;
}

}  // namespace

std::pair<ValueId, ValueId> tape_ssl_views(GradientTape& tape, ValueId e0,
                                           const std::vector<Edge>& edges, int user_count,
                                           int item_count, const BackboneConfig& cfg,
                                           Rng& rng) {
  switch (cfg.kind) {
    case BackboneKind::kLightGCN:
      throw ContractError("ssl_views: lightgcn has no SSL views");
    case BackboneKind::kSglEd: {
      const SparseSymMatrix& a1 = tape.own_sparse(build_norm_adj(
          sgl_edge_drop(edges, cfg.sgl_drop_rate, rng), user_count, item_count));
      const SparseSymMatrix& a2 = tape.own_sparse(build_norm_adj(
          sgl_edge_drop(edges, cfg.sgl_drop_rate, rng), user_count, item_count));
      return {tape_readout(tape, e0, a1, cfg.layers), tape_readout(tape, e0, a2, cfg.layers)};
    }
    case BackboneKind::kSimGCL: {
      const SparseSymMatrix& adj =
          tape.own_sparse(build_norm_adj(edges, user_count, item_count));
      ValueId v1 = simgcl_view(tape, e0, adj, cfg.layers, cfg.simgcl_eps, rng);
      ValueId v2 = simgcl_view(tape, e0, adj, cfg.layers, cfg.simgcl_eps, rng);
      return {v1, v2};
    }
  }
  throw ContractError("ssl_views: bad kind");
}

std::pair<DenseMatrix, DenseMatrix> ssl_views(const DenseMatrix& e0,
                                              const std::vector<Edge>& edges,
                                              int user_count, int item_count,
                                              const BackboneConfig& cfg,
                                              std::uint64_t seed) {
  GradientTape tape;
  Rng rng(seed);
  auto [v1, v2] = tape_ssl_views(tape, tape.constant(e0), edges, user_count, item_count,
                                 cfg, rng);
  return {tape.value(v1), tape.value(v2)};
}

ValueId tape_infonce_loss(GradientTape& tape, ValueId v1, ValueId v2, double tau,
                          int user_count) {
  if (tau <= 0.0) throw ContractError("infonce: tau must be positive");
  const int n = tape.value(v1).rows;
  if (tape.value(v2).rows != n || tape.value(v1).cols != tape.value(v2).cols)
    throw ShapeError("infonce: view shape mismatch");
  auto group_term = [&](int begin, int end) -> ValueId {
    std::vector<int> idx;
    idx.reserve(end - begin);
    for (int i = begin; i < end; ++i) idx.push_back(i);
    ValueId g1 = tape.row_normalize(tape.gather_rows(v1, idx));
    ValueId g2 = tape.row_normalize(tape.gather_rows(v2, idx));
    ValueId sims = tape.scale(tape.matmul_nt(g1, g2), 1.0 / tau);
    return tape.sum(tape.sub(tape.logsumexp_rows(sims), tape.diag(sims)));
  };
  ValueId users = group_term(0, user_count);
  ValueId items = group_term(user_count, n);
  return tape.add(users, items);
}

double infonce_loss(const DenseMatrix& v1, const DenseMatrix& v2, double tau,
                    int user_count) {
  GradientTape tape;
  return tape.scalar(
      tape_infonce_loss(tape, tape.constant(v1), tape.constant(v2), tau, user_count));
}

ValueId tape_model_loss(GradientTape& tape, const BackboneConfig& cfg, ValueId e0,
                        const SparseSymMatrix& norm_adj, const std::vector<Edge>& adj_edges,
                        int user_count, int item_count, const BprBatch& batch, Rng& rng) {
  ValueId readout = tape_readout(tape, e0, norm_adj, cfg.layers);
  return tape_model_loss_with_readout(tape, cfg, e0, readout, adj_edges, user_count,
                                      item_count, batch, rng);
}

ValueId tape_model_loss_with_readout(GradientTape& tape, const BackboneConfig& cfg,
                                     ValueId e0, ValueId readout,
                                     const std::vector<Edge>& adj_edges, int user_count,
                                     int item_count, const BprBatch& batch, Rng& rng) {
  ValueId loss = tape_bpr_loss(tape, readout, batch);
  if (cfg.is_ssl() && cfg.ssl_weight != 0.0) {
    auto [v1, v2] = tape_ssl_views(tape, e0, adj_edges, user_count, item_count, cfg, rng);
    ValueId ssl = tape_infonce_loss(tape, v1, v2, cfg.ssl_tau, user_count);
    loss = tape.add(loss, tape.scale(ssl, cfg.ssl_weight));
  }
  if (cfg.l2_reg != 0.0) {
    ValueId reg = tape.sum(tape.mul(e0, e0));
    loss = tape.add(loss, tape.scale(reg, cfg.l2_reg));
  }
  return loss;
}

double model_loss(const BackboneConfig& cfg, const DenseMatrix& e0,
                  const SparseSymMatrix& norm_adj, const std::vector<Edge>& adj_edges,
                  int user_count, int item_count, const BprBatch& batch,
                  std::uint64_t seed) {
  GradientTape tape;
  Rng rng(seed);
  return tape.scalar(tape_model_loss(tape, cfg, tape.constant(e0), norm_adj, adj_edges,
                                     user_count, item_count, batch, rng));
}

}  // namespace unlrec
