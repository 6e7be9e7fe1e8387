#include "unlrec/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "unlrec/errors.hpp"
#include "unlrec/rng.hpp"

namespace unlrec {

double sigmoid_value(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

RankMetrics rank_metrics(const EmbeddingState& state, int user_count, int item_count,
                         const std::vector<Edge>& test_edges,
                         const std::vector<Edge>& excluded_edges, int top_n) {
  std::vector<std::vector<int>> test_by_user(user_count), excl_by_user(user_count);
  for (const auto& e : test_edges) test_by_user[e.user].push_back(e.item);
  for (const auto& e : excluded_edges) excl_by_user[e.user].push_back(e.item);
  for (auto& v : test_by_user) std::sort(v.begin(), v.end());
  for (auto& v : excl_by_user) std::sort(v.begin(), v.end());

  RankMetrics out;
  double recall_sum = 0.0, ndcg_sum = 0.0;
  std::vector<std::pair<double, int>> ranked;  // (-score, item) for ascending sort

  for (int u = 0; u < user_count; ++u) {
    const auto& test_items = test_by_user[u];
    if (test_items.empty()) continue;
    const auto& excl = excl_by_user[u];

    ranked.clear();
    const double* urow = state.readout.row(u);
    for (int i = 0; i < item_count; ++i) {
      if (std::binary_search(excl.begin(), excl.end(), i)) continue;
      const double* irow = state.readout.row(user_count + i);
      double s = 0.0;
      for (int k = 0; k < state.readout.cols; ++k) s += urow[k] * irow[k];
      ranked.emplace_back(-s, i);
    }
    const int k_top = std::min<int>(top_n, static_cast<int>(ranked.size()));
    std::partial_sort(ranked.begin(), ranked.begin() + k_top, ranked.end());

    int hits = 0;
    double dcg = 0.0;
    for (int r = 0; r < k_top; ++r) {
      if (std::binary_search(test_items.begin(), test_items.end(), ranked[r].second)) {
        ++hits;
        dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
      }
    }
    double idcg = 0.0;
    const int ideal = std::min<int>(top_n, static_cast<int>(test_items.size()));
    for (int r = 0; r < ideal; ++r) idcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);

    recall_sum += static_cast<double>(hits) / static_cast<double>(test_items.size());
    ndcg_sum += idcg > 0.0 ? dcg / idcg : 0.0;
    out.users_evaluated += 1;
  }
  if (out.users_evaluated > 0) {
    out.recall = recall_sum / out.users_evaluated;
    out.ndcg = ndcg_sum / out.users_evaluated;
  }
  return out;
}

double mean_sigmoid_score(const EmbeddingState& state, const std::vector<Edge>& edges,
                          int user_count) {
  if (edges.empty()) throw ContractError("mean_sigmoid_score: empty edge set");
  double s = 0.0;
  for (const auto& e : edges)
    s += sigmoid_value(score_pair(state, e.user, user_count + e.item));
  return s / static_cast<double>(edges.size());
}

double mi_bf(const EmbeddingState& before, const EmbeddingState& after,
             const std::vector<Edge>& delta, int user_count) {
  if (delta.empty()) throw ContractError("mi_bf: empty unlearned edge set");
  return mean_sigmoid_score(before, delta, user_count) /
         mean_sigmoid_score(after, delta, user_count);
}

double mi_ng(const EmbeddingState& after, const std::vector<Edge>& delta,
             const std::vector<Edge>& negatives, int user_count) {
  if (delta.empty() || negatives.empty())
    throw ContractError("mi_ng: empty edge or negative set");
  return mean_sigmoid_score(after, negatives, user_count) /
         mean_sigmoid_score(after, delta, user_count);
}

std::vector<Edge> sample_negative_pairs(const InteractionGraph& known, std::size_t count,
                                        std::uint64_t seed) {
  const std::size_t total =
      static_cast<std::size_t>(known.user_count) * known.item_count;
  if (total < known.edges.size() + count)
    throw ContractError("sample_negative_pairs: not enough uninteracted pairs");
  Rng rng(seed);
  std::vector<Edge> out;
  out.reserve(count);
  while (out.size() < count) {
    Edge e{rng.index(static_cast<std::size_t>(known.user_count)),
           rng.index(static_cast<std::size_t>(known.item_count))};
    if (!known.has_edge(e.user, e.item)) out.push_back(e);
  }
  return out;
}

void export_score_distribution(const std::string& path, const EmbeddingState& state,
                               int user_count, const std::vector<ScoreSet>& sets) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write score file: " + path);
  out << "set,user,item,score,sigmoid\n";
  out.precision(10);
  for (const auto& set : sets) {
    double score_sum = 0.0, sig_sum = 0.0;
    for (const auto& e : *set.edges) {
      const double s = score_pair(state, e.user, user_count + e.item);
      const double g = sigmoid_value(s);
      score_sum += s;
      sig_sum += g;
      out << set.name << "," << e.user << "," << e.item << "," << s << "," << g << "\n";
    }
    if (!set.edges->empty()) {
      const auto n = static_cast<double>(set.edges->size());
      out << set.name << "_mean,,," << score_sum / n << "," << sig_sum / n << "\n";
    }
  }
}

}  // namespace unlrec
