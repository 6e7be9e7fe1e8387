#include "unlrec/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "unlrec/errors.hpp"

namespace unlrec {

bool InteractionGraph::has_edge(int user, int item) const {
  const auto& items = user_items[user];
  return std::binary_search(items.begin(), items.end(), item);
}

InteractionGraph make_graph(int user_count, int item_count, std::vector<Edge> edges) {
  for (const auto& e : edges) {
    if (e.user < 0 || e.user >= user_count)
      throw ContractError("edge user " + std::to_string(e.user) + " out of range");
    if (e.item < 0 || e.item >= item_count)
      throw ContractError("edge item " + std::to_string(e.item) + " out of range");
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  InteractionGraph g;
  g.user_count = user_count;
  g.item_count = item_count;
  g.user_items.resize(user_count);
  for (const auto& e : edges) g.user_items[e.user].push_back(e.item);
  g.edges = std::move(edges);
  return g;
}

LoadedDataset load_edges(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset file: " + path);

  LoadedDataset out;
  std::map<std::int64_t, int> user_map, item_map;
  std::vector<Edge> edges;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::int64_t u, i;
    if (!(ls >> u >> i))
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected \"user\\titem\"");
    std::string rest;
    if (ls >> rest)
      throw ParseError(path + ":" + std::to_string(line_no) + ": trailing tokens");
    auto [uit, unew] = user_map.try_emplace(u, static_cast<int>(user_map.size()));
    auto [iit, inew] = item_map.try_emplace(i, static_cast<int>(item_map.size()));
    edges.push_back({uit->second, iit->second});
  }
  if (edges.empty()) throw ParseError(path + ": no edges");

  const std::size_t raw = edges.size();
  out.graph = make_graph(static_cast<int>(user_map.size()),
                         static_cast<int>(item_map.size()), std::move(edges));
  out.duplicate_lines = static_cast<int>(raw - out.graph.edges.size());
  for (const auto& [orig, idx] : user_map) out.user_ids.emplace_back(orig, idx);
  for (const auto& [orig, idx] : item_map) out.item_ids.emplace_back(orig, idx);
  return out;
}

TrainTestSplit split_train_test(const InteractionGraph& g, double test_fraction,
                                std::uint64_t seed) {
  if (test_fraction < 0.0 || test_fraction >= 1.0)
    throw ContractError("test_fraction must be in [0,1)");

  const auto target =
      static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(g.edges.size())));

  std::vector<Edge> order = g.edges;
  Rng rng(seed);
  rng.shuffle(order);

  std::vector<int> train_degree(g.user_count, 0);
  for (const auto& e : g.edges) train_degree[e.user]++;

  TrainTestSplit split;
  split.test.reserve(target);
  for (const auto& e : order) {
    if (split.test.size() < target && train_degree[e.user] > 1) {
      split.test.push_back(e);
      train_degree[e.user]--;
    } else {
      split.train.push_back(e);
    }
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

SparseSymMatrix build_raw_adj(const std::vector<Edge>& edges, int user_count,
                              int item_count) {
  const int dim = user_count + item_count;
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(edges.size());
  for (const auto& e : edges) pairs.emplace_back(e.user, user_count + e.item);
  std::vector<double> w(edges.size(), 1.0);
  return SparseSymMatrix::from_undirected(dim, pairs, w);
}

SparseSymMatrix build_norm_adj(const std::vector<Edge>& edges, int user_count,
                               int item_count) {
  const int dim = user_count + item_count;
  std::vector<int> degree(dim, 0);
  for (const auto& e : edges) {
    degree[e.user]++;
    degree[user_count + e.item]++;
  }
  std::vector<std::pair<int, int>> pairs;
  std::vector<double> w;
  pairs.reserve(edges.size());
  w.reserve(edges.size());
  for (const auto& e : edges) {
    const int u = e.user;
    const int v = user_count + e.item;
    pairs.emplace_back(u, v);
    w.push_back(1.0 / std::sqrt(static_cast<double>(degree[u]) * degree[v]));
  }
  return SparseSymMatrix::from_undirected(dim, pairs, w);
}

std::vector<int> sample_negatives(const InteractionGraph& g, int user, int count, Rng& rng) {
  const auto& seen = g.user_items[user];
  const int free_items = g.item_count - static_cast<int>(seen.size());
  if (free_items <= 0)
    throw ContractError("sample_negatives: user " + std::to_string(user) +
                        " interacted with every item");
  std::vector<int> out;
  out.reserve(count);
  while (static_cast<int>(out.size()) < count) {
    const int item = rng.index(static_cast<std::size_t>(g.item_count));
    if (!std::binary_search(seen.begin(), seen.end(), item)) out.push_back(item);
  }
  return out;
}

UnlearnRequest make_unlearn_request(const InteractionGraph& g, std::vector<Edge> delta) {
  std::sort(delta.begin(), delta.end());
  delta.erase(std::unique(delta.begin(), delta.end()), delta.end());
  for (const auto& e : delta)
    if (!g.has_edge(e.user, e.item))
      throw ContractError("unlearn edge (" + std::to_string(e.user) + "," +
                          std::to_string(e.item) + ") not in graph");

  UnlearnRequest req;
  req.residual_edges.reserve(g.edges.size() - delta.size());
  std::set_difference(g.edges.begin(), g.edges.end(), delta.begin(), delta.end(),
                      std::back_inserter(req.residual_edges));
  req.delta_edges = std::move(delta);

  req.idm = build_raw_adj(req.delta_edges, g.user_count, g.item_count);
  req.residual_adj = build_norm_adj(req.residual_edges, g.user_count, g.item_count);
  req.delta_degrees.resize(g.node_count());
  for (int i = 0; i < g.node_count(); ++i) req.delta_degrees[i] = req.idm.degree(i);

  // normalized IDM; degrees here are the delta degrees, zero rows stay zero
  std::vector<std::pair<int, int>> pairs;
  std::vector<double> w;
  pairs.reserve(req.delta_edges.size());
  for (const auto& e : req.delta_edges) {
    const int u = e.user;
    const int v = g.user_count + e.item;
    pairs.emplace_back(u, v);
    w.push_back(1.0 / std::sqrt(static_cast<double>(req.delta_degrees[u]) *
                                req.delta_degrees[v]));
  }
  req.idm_norm = SparseSymMatrix::from_undirected(g.node_count(), pairs, w);
  return req;
}

UnlearnRequest sample_unlearn_set(const InteractionGraph& g, double rho_percent, Rng& rng) {
  if (rho_percent <= 0.0 || rho_percent >= 100.0)
    throw ContractError("rho_percent must be in (0,100)");
  const auto want = static_cast<std::size_t>(
      std::ceil(rho_percent / 100.0 * static_cast<double>(g.edges.size())));
  std::vector<Edge> order = g.edges;
  rng.shuffle(order);
  order.resize(std::min(want, order.size()));
  return make_unlearn_request(g, std::move(order));
}

AttackResult inject_adversarial_edges(const InteractionGraph& g, const PairScorer& scorer,
                                      int count, Rng& rng) {
  if (count <= 0) throw ContractError("inject_adversarial_edges: count must be positive");

  struct Cand {
    double score;
    Edge e;
  };
  std::vector<Cand> cands;
  for (int u = 0; u < g.user_count; ++u)
    for (int i = 0; i < g.item_count; ++i)
      if (!g.has_edge(u, i)) cands.push_back({scorer(u, i), {u, i}});

  if (static_cast<int>(cands.size()) < count)
    throw ContractError("inject_adversarial_edges: only " + std::to_string(cands.size()) +
                        " candidate pairs for " + std::to_string(count) + " edges");

  const std::size_t tail = std::min<std::size_t>(
      std::max<std::size_t>(count, static_cast<std::size_t>(count) * 10), cands.size());
  std::nth_element(cands.begin(), cands.begin() + (tail - 1), cands.end(),
                   [](const Cand& a, const Cand& b) {
                     return a.score != b.score ? a.score < b.score : a.e < b.e;
                   });
  cands.resize(tail);
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    return a.score != b.score ? a.score < b.score : a.e < b.e;
  });

  std::vector<Edge> pool;
  pool.reserve(tail);
  for (const auto& c : cands) pool.push_back(c.e);
  rng.shuffle(pool);
  pool.resize(count);
  std::sort(pool.begin(), pool.end());

  std::vector<Edge> merged = g.edges;
  merged.insert(merged.end(), pool.begin(), pool.end());
  AttackResult out;
  out.attacked = make_graph(g.user_count, g.item_count, std::move(merged));
  out.adversarial_edges = std::move(pool);
  return out;
}

void write_edge_file(const std::string& path, const std::vector<Edge>& edges,
                     const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write edge file: " + path);
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  for (const auto& e : edges) out << e.user << "\t" << e.item << "\n";
}

std::vector<Edge> read_edge_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open edge file: " + path);
  std::vector<Edge> edges;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    Edge e;
    if (!(ls >> e.user >> e.item))
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected \"user\\titem\"");
    edges.push_back(e);
  }
  return edges;
}

}  // namespace unlrec
