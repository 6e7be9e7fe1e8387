#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "unlrec/graph.hpp"
#include "unlrec/matrix.hpp"
#include "unlrec/rng.hpp"
#include "unlrec/tape.hpp"

namespace unlrec {

enum class BackboneKind { kLightGCN, kSglEd, kSimGCL };

BackboneKind backbone_kind_from_string(const std::string& s);
std::string to_string(BackboneKind k);

struct BackboneConfig {
  BackboneKind kind = BackboneKind::kLightGCN;
  int embed_dim = 32;          // d
  int layers = 3;              // L, readout sums layers 0..L-1
  double ssl_tau = 0.2;
  double ssl_weight = 0.1;
  double sgl_drop_rate = 0.1;  // fraction of edges removed per view
  double simgcl_eps = 0.1;     // per-coordinate noise magnitude
  double l2_reg = 1e-4;

  bool is_ssl() const { return kind != BackboneKind::kLightGCN; }
};

// Layer-0 embeddings plus everything the propagation derives from them.
struct EmbeddingState {
  DenseMatrix e0;
  std::vector<DenseMatrix> per_layer;  // E_0 .. E_{L-1}
  DenseMatrix readout;                 // sum of per_layer
};

// E_l = normAdj * E_{l-1}; readout is the sum over layers 0..L-1.
EmbeddingState forward(const DenseMatrix& e0, const SparseSymMatrix& norm_adj, int layers);

// Scores y[i][j] = readout_row(row_ids_a[i]) . readout_row(row_ids_b[j]).
// Row ids are graph node ids (items offset by user_count).
DenseMatrix predict_scores(const EmbeddingState& state, const std::vector<int>& rows_a,
                           const std::vector<int>& rows_b);
double score_pair(const EmbeddingState& state, int node_a, int node_b);

// One BPR training batch; all entries are graph node ids.
struct BprBatch {
  std::vector<int> users;
  std::vector<int> pos_items;
  std::vector<int> neg_items;
  std::size_t size() const { return users.size(); }
};

// Uniform positive-edge sample with one uninteracted negative per positive.
// Membership is checked against `interactions` (the edge set that defines
// positives, e.g. the residual graph during pre-training).
BprBatch sample_bpr_batch(const InteractionGraph& interactions, int batch_size, Rng& rng);

// Consecutive slice [begin, begin+len) of `order` as a batch (epoch iteration).
BprBatch batch_from_slice(const InteractionGraph& interactions,
                          const std::vector<Edge>& order, std::size_t begin,
                          std::size_t len, Rng& rng);

double bpr_loss(const EmbeddingState& state, const BprBatch& batch);

// Keeps |edges| - round(rate * |edges|) edges, chosen uniformly.
std::vector<Edge> sgl_edge_drop(const std::vector<Edge>& edges, double rate, Rng& rng);

// Two stochastic views of the embeddings for contrastive training.
// sgl-ed: two independently edge-dropped adjacencies re-propagated from e0.
// simgcl: per-layer sign-aligned uniform noise added to each propagated layer.
std::pair<DenseMatrix, DenseMatrix> ssl_views(const DenseMatrix& e0,
                                              const std::vector<Edge>& edges,
                                              int user_count, int item_count,
                                              const BackboneConfig& cfg,
                                              std::uint64_t seed);

// Per-node InfoNCE with in-group denominators, users and items summed
// separately then added. Zero-norm rows contribute cosine 0.
double infonce_loss(const DenseMatrix& v1, const DenseMatrix& v2, double tau,
                    int user_count);

// L_M dispatcher: BPR (+ sslWeight * InfoNCE for SSL backbones) + L2 reg.
double model_loss(const BackboneConfig& cfg, const DenseMatrix& e0,
                  const SparseSymMatrix& norm_adj, const std::vector<Edge>& adj_edges,
                  int user_count, int item_count, const BprBatch& batch,
                  std::uint64_t seed);

// ---- tape variants (training path) ----

ValueId tape_readout(GradientTape& tape, ValueId e0, const SparseSymMatrix& norm_adj,
                     int layers);
ValueId tape_bpr_loss(GradientTape& tape, ValueId readout, const BprBatch& batch);
std::pair<ValueId, ValueId> tape_ssl_views(GradientTape& tape, ValueId e0,
                                           const std::vector<Edge>& edges, int user_count,
                                           int item_count, const BackboneConfig& cfg,
                                           Rng& rng);
ValueId tape_infonce_loss(GradientTape& tape, ValueId v1, ValueId v2, double tau,
                          int user_count);
ValueId tape_model_loss(GradientTape& tape, const BackboneConfig& cfg, ValueId e0,
                        const SparseSymMatrix& norm_adj, const std::vector<Edge>& adj_edges,
                        int user_count, int item_count, const BprBatch& batch, Rng& rng);

// Same, with the propagated readout already on the tape (spares a second
// propagation when the caller shares it with other loss terms).
ValueId tape_model_loss_with_readout(GradientTape& tape, const BackboneConfig& cfg,
                                     ValueId e0, ValueId readout,
                                     const std::vector<Edge>& adj_edges, int user_count,
                                     int item_count, const BprBatch& batch, Rng& rng);

}  // namespace unlrec
