#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "unlrec/matrix.hpp"
#include "unlrec/rng.hpp"

namespace unlrec {

// Undirected user-item interaction. Items are stored with raw ids 0..J-1;
// the graph node id of item j is user_count + j.
struct Edge {
  int user = 0;
  int item = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Bipartite interaction graph. Node ids: users 0..I-1, items I..I+J-1.
// Immutable after construction; safe for concurrent readers.
struct InteractionGraph {
  int user_count = 0;
  int item_count = 0;
  std::vector<Edge> edges;                   // sorted, unique
  std::vector<std::vector<int>> user_items;  // sorted item ids per user

  int node_count() const { return user_count + item_count; }
  int item_node(int item) const { return user_count + item; }
  bool has_edge(int user, int item) const;
};

InteractionGraph make_graph(int user_count, int item_count, std::vector<Edge> edges);

struct LoadedDataset {
  InteractionGraph graph;
  std::vector<std::pair<std::int64_t, int>> user_ids;  // original -> contiguous
  std::vector<std::pair<std::int64_t, int>> item_ids;
  int duplicate_lines = 0;
};

// Reads "user<TAB>item" lines ('#' comments allowed), re-indexes ids to be
// contiguous by first appearance and dedupes. Throws ParseError with the line
// number on malformed input; an empty edge set is an error.
LoadedDataset load_edges(const std::string& path);

// Uniform random edge split. Users with a single edge keep it in train, and
// every user retains at least one training edge where possible.
struct TrainTestSplit {
  std::vector<Edge> train;
  std::vector<Edge> test;
};
TrainTestSplit split_train_test(const InteractionGraph& g, double test_fraction,
                                std::uint64_t seed);

// D^{-1/2} * A * D^{-1/2} over node ids; entry for (u, v) is 1/sqrt(du*dv).
// Nodes without edges simply have empty rows.
SparseSymMatrix build_norm_adj(const std::vector<Edge>& edges, int user_count,
                               int item_count);

// Unnormalized symmetric adjacency (weight 1 per edge).
SparseSymMatrix build_raw_adj(const std::vector<Edge>& edges, int user_count,
                              int item_count);

// Uniform over items the user has not interacted with in `g`. Errors if the
// user has interacted with every item.
std::vector<int> sample_negatives(const InteractionGraph& g, int user, int count, Rng& rng);

// An unlearning request: the edges to undo plus everything derived from them.
struct UnlearnRequest {
  std::vector<Edge> delta_edges;     // E_delta, sorted
  std::vector<Edge> residual_edges;  // E_r, sorted
  SparseSymMatrix idm;               // symmetric adjacency of E_delta, weight 1
  SparseSymMatrix residual_adj;      // degree-normalized adjacency of E_r
  std::vector<int> delta_degrees;    // node degree within idm
  SparseSymMatrix idm_norm;          // D^{-1/2} idm D^{-1/2}, zero-degree rows zeroed
};

UnlearnRequest make_unlearn_request(const InteractionGraph& g, std::vector<Edge> delta);

// Uniformly samples ceil(rho_percent/100 * |E|) edges as the unlearning set.
UnlearnRequest sample_unlearn_set(const InteractionGraph& g, double rho_percent, Rng& rng);

// Scores every (user, item) pair; used by the adversarial attack.
using PairScorer = std::function<double(int user, int item)>;

// Injects `count` edges drawn uniformly from the bottom-scoring tail of
// uninteracted pairs (tail size 10x count, clamped to the candidate pool).
struct AttackResult {
  InteractionGraph attacked;
  std::vector<Edge> adversarial_edges;
};
AttackResult inject_adversarial_edges(const InteractionGraph& g, const PairScorer& scorer,
                                      int count, Rng& rng);

// Edge list files: "user<TAB>item" per line, '#' comments. Used for split and
// attack manifests.
void write_edge_file(const std::string& path, const std::vector<Edge>& edges,
                     const std::string& header_comment = "");
std::vector<Edge> read_edge_file(const std::string& path);

}  // namespace unlrec
