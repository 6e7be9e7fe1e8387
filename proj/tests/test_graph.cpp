#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "support.hpp"
#include "unlrec/errors.hpp"
#include "unlrec/graph.hpp"

using namespace unlrec;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const auto path = (std::filesystem::temp_directory_path() / name).string();
  std::ofstream out(path);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("load_edges parses and reindexes") {
  const auto path = write_temp("unlrec_load1.tsv", "0\t0\n1\t0\n");
  auto data = load_edges(path);
  CHECK(data.graph.user_count == 2);
  CHECK(data.graph.item_count == 1);
  CHECK(data.graph.edges.size() == 2);
  CHECK(data.duplicate_lines == 0);
}

TEST_CASE("load_edges dedupes and counts duplicates") {
  const auto path = write_temp("unlrec_load2.tsv", "5\t9\n5\t9\n6\t9\n");
  auto data = load_edges(path);
  CHECK(data.graph.edges.size() == 2);
  CHECK(data.duplicate_lines == 1);
}

TEST_CASE("load_edges keeps the id mapping") {
  const auto path = write_temp("unlrec_load3.tsv", "# comment\n42\t7\n42\t8\n50\t7\n");
  auto data = load_edges(path);
  CHECK(data.graph.user_count == 2);
  CHECK(data.graph.item_count == 2);
  REQUIRE(data.user_ids.size() == 2);
  CHECK(data.user_ids[0].first == 42);
  CHECK(data.user_ids[1].first == 50);
}

TEST_CASE("load_edges errors carry line numbers") {
  const auto path = write_temp("unlrec_load4.tsv", "0\t0\nnot_an_edge\n");
  CHECK_THROWS_WITH_AS(load_edges(path), doctest::Contains(":2:"), ParseError);
  const auto empty = write_temp("unlrec_load5.tsv", "# nothing\n");
  CHECK_THROWS_AS(load_edges(empty), ParseError);
}

TEST_CASE("split respects the requested fraction") {
  auto g = testsupport::random_graph(20, 30, 60, 77, 2);
  const auto total = g.edges.size();
  auto split = split_train_test(g, 0.2, 9);
  CHECK(split.test.size() == static_cast<std::size_t>(std::llround(0.2 * total)));
  CHECK(split.train.size() + split.test.size() == total);
}

TEST_CASE("split keeps single-edge users in train") {
  // user 0 has exactly one edge; the split may never take it
  std::vector<Edge> edges{{0, 0}};
  for (int i = 0; i < 20; ++i) edges.push_back({1, i});
  auto g = make_graph(2, 20, edges);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto split = split_train_test(g, 0.5, seed);
    bool found = false;
    for (const auto& e : split.train)
      if (e == Edge{0, 0}) found = true;
    CHECK(found);
  }
}

TEST_CASE("split is deterministic and degenerate fraction works") {
  auto g = testsupport::random_graph(10, 10, 40, 5, 1);
  auto a = split_train_test(g, 0.25, 1234);
  auto b = split_train_test(g, 0.25, 1234);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
  auto none = split_train_test(g, 0.0, 1);
  CHECK(none.test.empty());
  CHECK(none.train.size() == g.edges.size());
}

TEST_CASE("build_norm_adj degree arithmetic") {
  // single edge: degrees 1,1 -> weight 1
  auto adj1 = build_norm_adj({{0, 0}}, 1, 1);
  auto e1 = adj1.entries();
  REQUIRE(e1.size() == 2);
  CHECK(e1[0].w == 1.0);

  // item 0 shared by two users: item degree 2 -> 1/sqrt(2)
  auto adj2 = build_norm_adj({{0, 0}, {1, 0}}, 2, 1);
  for (const auto& e : adj2.entries())
    CHECK(e.w == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("build_norm_adj rows sum below sqrt of max degree and stay symmetric") {
  auto g = testsupport::random_graph(15, 25, 80, 99, 1);
  auto adj = build_norm_adj(g.edges, 15, 25);
  int max_degree = 0;
  for (int i = 0; i < adj.dim(); ++i) max_degree = std::max(max_degree, adj.degree(i));
  for (int i = 0; i < adj.dim(); ++i) {
    double row_sum = 0.0;
    for (int k = adj.row_begin(i); k < adj.row_end(i); ++k) row_sum += adj.weight_at(k);
    CHECK(row_sum <= std::sqrt(static_cast<double>(max_degree)) + 1e-12);
  }
  // exact symmetry
  auto entries = adj.entries();
  std::set<std::tuple<int, int, double>> set;
  for (const auto& e : entries) set.insert({e.row, e.col, e.w});
  for (const auto& e : entries) CHECK(set.count({e.col, e.row, e.w}) == 1);
}

TEST_CASE("isolated nodes produce empty rows, not NaN") {
  // node 1 (user) has no edges left
  auto adj = build_norm_adj({{0, 0}}, 2, 1);
  CHECK(adj.degree(1) == 0);
  DenseMatrix x(3, 2, 1.0);
  auto y = adj.multiply(x);
  CHECK(y.all_finite());
  CHECK(y.at(1, 0) == 0.0);
}

TEST_CASE("sample_negatives avoids interacted items") {
  auto g = testsupport::random_graph(5, 12, 30, 3, 2);
  Rng rng(7);
  for (int u = 0; u < 5; ++u) {
    auto negs = sample_negatives(g, u, 50, rng);
    for (int item : negs) CHECK_FALSE(g.has_edge(u, item));
  }
}

TEST_CASE("sample_negatives single remaining item and count zero") {
  std::vector<Edge> edges;
  for (int i = 0; i < 9; ++i) edges.push_back({0, i});  // item 9 left
  edges.push_back({1, 0});
  auto g = make_graph(2, 10, edges);
  Rng rng(1);
  auto negs = sample_negatives(g, 0, 5, rng);
  for (int item : negs) CHECK(item == 9);
  CHECK(sample_negatives(g, 0, 0, rng).empty());

  std::vector<Edge> full;
  for (int i = 0; i < 10; ++i) full.push_back({0, i});
  full.push_back({1, 0});
  auto g2 = make_graph(2, 10, full);
  CHECK_THROWS_AS(sample_negatives(g2, 0, 1, rng), ContractError);
}

TEST_CASE("negative sampling is uniform (chi-square over 1e5 draws)") {
  std::vector<Edge> edges{{0, 0}, {0, 1}, {1, 0}};
  auto g = make_graph(2, 12, edges);  // user 0 has 10 candidate items (2..11)
  Rng rng(2024);
  const int draws = 100000;
  std::vector<int> counts(12, 0);
  for (int k = 0; k < draws; ++k) counts[sample_negatives(g, 0, 1, rng)[0]]++;
  CHECK(counts[0] == 0);
  CHECK(counts[1] == 0);
  const double expected = draws / 10.0;
  double chi2 = 0.0;
  for (int i = 2; i < 12; ++i) {
    const double d = counts[i] - expected;
    chi2 += d * d / expected;
  }
  // 9 degrees of freedom; mean 9, sd sqrt(18); 3 sigma above the mean
  CHECK(chi2 < 9.0 + 3.0 * std::sqrt(18.0));
}

TEST_CASE("sample_unlearn_set sizes and id offsets") {
  auto g = testsupport::random_graph(40, 40, 960, 11, 1);
  REQUIRE(g.edges.size() == 1000);
  Rng rng(5);
  auto req = sample_unlearn_set(g, 5.0, rng);
  CHECK(req.delta_edges.size() == 50);
  CHECK(req.delta_edges.size() + req.residual_edges.size() == g.edges.size());

  // explicit request: with I=2, J=2, edge (u0, v1) lands at nodes 0 and 3
  auto g2 = make_graph(2, 2, {{0, 1}, {1, 0}});
  auto req2 = make_unlearn_request(g2, {{0, 1}});
  auto entries = req2.idm.entries();
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].row == 0);
  CHECK(entries[0].col == 3);
  CHECK(entries[1].row == 3);
  CHECK(entries[1].col == 0);
}

TEST_CASE("request partitions the adjacency entry set") {
  auto g = testsupport::random_graph(12, 14, 60, 21, 1);
  Rng rng(9);
  auto req = sample_unlearn_set(g, 20.0, rng);

  auto key_set = [](const SparseSymMatrix& m) {
    std::set<std::pair<int, int>> s;
    for (const auto& e : m.entries()) s.insert({e.row, e.col});
    return s;
  };
  auto all = key_set(build_raw_adj(g.edges, 12, 14));
  auto delta = key_set(req.idm);
  auto resid = key_set(req.residual_adj);
  CHECK(delta.size() + resid.size() == all.size());
  for (const auto& k : delta) {
    CHECK(all.count(k) == 1);
    CHECK(resid.count(k) == 0);
  }

  // residual adjacency equals the one built from residual edges
  auto rebuilt = build_norm_adj(req.residual_edges, 12, 14);
  auto re = rebuilt.entries();
  auto ra = req.residual_adj.entries();
  REQUIRE(re.size() == ra.size());
  for (std::size_t i = 0; i < re.size(); ++i) {
    CHECK(re[i].row == ra[i].row);
    CHECK(re[i].col == ra[i].col);
    CHECK(re[i].w == ra[i].w);
  }

  // delta degrees match the idm structure
  for (int n = 0; n < g.node_count(); ++n)
    CHECK(req.delta_degrees[n] == req.idm.degree(n));
}

TEST_CASE("unlearn sampling deterministic under seed") {
  auto g = testsupport::random_graph(10, 10, 50, 31, 1);
  Rng r1(42), r2(42);
  auto a = sample_unlearn_set(g, 10.0, r1);
  auto b = sample_unlearn_set(g, 10.0, r2);
  CHECK(a.delta_edges == b.delta_edges);
}

TEST_CASE("adversarial injection picks the bottom score tail") {
  auto g = testsupport::powerlaw_graph(50, 50, 500, 17);
  // deterministic synthetic scorer: low scores for high (u + i)
  auto scorer = [](int u, int i) { return -static_cast<double>(u + i); };
  Rng rng(3);
  auto res = inject_adversarial_edges(g, scorer, 10, rng);
  CHECK(res.adversarial_edges.size() == 10);

  // disjoint from the original edge set
  for (const auto& e : res.adversarial_edges) CHECK_FALSE(g.has_edge(e.user, e.item));
  CHECK(res.attacked.edges.size() == g.edges.size() + 10);

  // mean injected score below the 10th percentile of all-pair scores
  std::vector<double> all;
  for (int u = 0; u < 50; ++u)
    for (int i = 0; i < 50; ++i) all.push_back(scorer(u, i));
  std::sort(all.begin(), all.end());
  const double p10 = all[all.size() / 10];
  double mean = 0.0;
  for (const auto& e : res.adversarial_edges) mean += scorer(e.user, e.item);
  mean /= 10.0;
  CHECK(mean < p10);
}

TEST_CASE("adversarial injection with a single candidate always picks it") {
  // user 0 has interacted with every item except item 4
  std::vector<Edge> edges;
  for (int i = 0; i < 5; ++i)
    if (i != 4) edges.push_back({0, i});
  auto g = make_graph(1, 5, edges);
  auto scorer = [](int, int i) { return static_cast<double>(i); };
  for (std::uint64_t s = 0; s < 5; ++s) {
    Rng rng(s);
    auto res = inject_adversarial_edges(g, scorer, 1, rng);
    REQUIRE(res.adversarial_edges.size() == 1);
    CHECK(res.adversarial_edges[0] == Edge{0, 4});
  }
  Rng rng(0);
  CHECK_THROWS_AS(inject_adversarial_edges(g, scorer, 2, rng), ContractError);
}

TEST_CASE("edge files round-trip") {
  auto g = testsupport::random_graph(6, 6, 20, 55, 1);
  const auto path =
      (std::filesystem::temp_directory_path() / "unlrec_edges.tsv").string();
  write_edge_file(path, g.edges, "test edges");
  auto back = read_edge_file(path);
  CHECK(back == g.edges);
}
