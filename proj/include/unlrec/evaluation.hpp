#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "unlrec/backbone.hpp"
#include "unlrec/graph.hpp"
#include "unlrec/matrix.hpp"

namespace unlrec {

struct RankMetrics {
  double recall = 0.0;
  double ndcg = 0.0;
  int users_evaluated = 0;
};

// Full-rank evaluation: for each user with test items, rank every item not in
// that user's exclusion list (their training interactions). Gain 1, discount
// 1/log2(rank+1), ties broken by item id ascending.
RankMetrics rank_metrics(const EmbeddingState& state, int user_count, int item_count,
                         const std::vector<Edge>& test_edges,
                         const std::vector<Edge>& excluded_edges, int top_n);

// Ratio of mean sigmoid scores on the unlearned edges before vs after.
double mi_bf(const EmbeddingState& before, const EmbeddingState& after,
             const std::vector<Edge>& delta, int user_count);

// Ratio of mean sigmoid scores of never-interacted pairs vs unlearned edges
// on the unlearned model. > 1 means unlearned edges sit below negatives.
double mi_ng(const EmbeddingState& after, const std::vector<Edge>& delta,
             const std::vector<Edge>& negatives, int user_count);

// Uniform pairs disjoint from `known` (everything ever interacted).
std::vector<Edge> sample_negative_pairs(const InteractionGraph& known, std::size_t count,
                                        std::uint64_t seed);

double sigmoid_value(double x);
double mean_sigmoid_score(const EmbeddingState& state, const std::vector<Edge>& edges,
                          int user_count);

// CSV with columns (set,user,item,score,sigmoid), one section per named edge
// set, plus a per-set summary row carrying the means.
struct ScoreSet {
  std::string name;
  const std::vector<Edge>* edges;
};
void export_score_distribution(const std::string& path, const EmbeddingState& state,
                               int user_count, const std::vector<ScoreSet>& sets);

struct MetricsReport {
  double recall = 0.0;
  double ndcg = 0.0;
  double mi_bf = 0.0;
  double mi_ng = 0.0;
  int top_n = 20;
  int users_evaluated = 0;
  int edges_evaluated = 0;
};

}  // namespace unlrec
