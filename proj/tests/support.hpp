#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "unlrec/graph.hpp"
#include "unlrec/matrix.hpp"
#include "unlrec/rng.hpp"

namespace testsupport {

inline unlrec::DenseMatrix random_matrix(int r, int c, std::uint64_t seed,
                                         double lo = -1.0, double hi = 1.0) {
  unlrec::Rng rng(seed);
  return unlrec::DenseMatrix::random_uniform(r, c, lo, hi, rng);
}

// Random symmetric sparse matrix without self loops.
inline unlrec::SparseSymMatrix random_sparse_sym(int dim, int undirected_edges,
                                                 std::uint64_t seed) {
  unlrec::Rng rng(seed);
  std::set<std::pair<int, int>> seen;
  std::vector<std::pair<int, int>> pairs;
  std::vector<double> weights;
  while (static_cast<int>(pairs.size()) < undirected_edges) {
    int a = rng.index(dim), b = rng.index(dim);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (!seen.insert({a, b}).second) continue;
    pairs.emplace_back(a, b);
    weights.push_back(rng.uniform(0.1, 1.0));
  }
  return unlrec::SparseSymMatrix::from_undirected(dim, pairs, weights);
}

// Random bipartite interaction graph; every user gets at least min_per_user
// edges so splits and negative sampling stay well defined.
inline unlrec::InteractionGraph random_graph(int users, int items, int extra_edges,
                                             std::uint64_t seed, int min_per_user = 1) {
  unlrec::Rng rng(seed);
  std::set<std::pair<int, int>> seen;
  std::vector<unlrec::Edge> edges;
  for (int u = 0; u < users; ++u) {
    for (int k = 0; k < min_per_user; ++k) {
      int i = rng.index(items);
      if (seen.insert({u, i}).second) edges.push_back({u, i});
    }
  }
  int guard = 0;
  while (static_cast<int>(edges.size()) < extra_edges + users * min_per_user &&
         guard++ < 100000) {
    int u = rng.index(users), i = rng.index(items);
    if (seen.insert({u, i}).second) edges.push_back({u, i});
  }
  return unlrec::make_graph(users, items, std::move(edges));
}

// Power-law-ish bipartite graph for desk-scale runs: node weights follow
// rank^-s, edges drawn independently until the target count is reached.
inline unlrec::InteractionGraph powerlaw_graph(int users, int items, int target_edges,
                                               std::uint64_t seed, double s = 0.8) {
  unlrec::Rng rng(seed);
  auto weights = [&](int n) {
    std::vector<double> w(n);
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += (w[i] = 1.0 / std::pow(i + 1.0, s));
    for (auto& x : w) x /= total;
    return w;
  };
  auto make_cdf = [](const std::vector<double>& w) {
    std::vector<double> cdf(w.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) cdf[i] = (acc += w[i]);
    cdf.back() = 1.0;
    return cdf;
  };
  const auto ucdf = make_cdf(weights(users));
  const auto icdf = make_cdf(weights(items));
  auto draw = [&](const std::vector<double>& cdf) {
    const double x = rng.uniform01();
    return static_cast<int>(std::lower_bound(cdf.begin(), cdf.end(), x) - cdf.begin());
  };
  std::set<std::pair<int, int>> seen;
  std::vector<unlrec::Edge> edges;
  int guard = 0;
  while (static_cast<int>(edges.size()) < target_edges && guard++ < target_edges * 200) {
    const int u = draw(ucdf);
    const int i = draw(icdf);
    if (seen.insert({u, i}).second) edges.push_back({u, i});
  }
  return unlrec::make_graph(users, items, std::move(edges));
}

}  // namespace testsupport
