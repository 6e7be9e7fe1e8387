#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "support.hpp"
#include "unlrec/backbone.hpp"
#include "unlrec/errors.hpp"
#include "unlrec/gradcheck.hpp"

using namespace unlrec;

namespace {

// 3-node path i0 - u0 - i1 as a bipartite graph: one user, two items.
InteractionGraph path_graph() { return make_graph(1, 2, {{0, 0}, {0, 1}}); }

}  // namespace

TEST_CASE("forward with one layer returns e0 as readout") {
  auto g = path_graph();
  auto adj = build_norm_adj(g.edges, 1, 2);
  DenseMatrix e0 = testsupport::random_matrix(3, 4, 1);
  auto s = forward(e0, adj, 1);
  CHECK(max_abs_diff(s.readout, e0) == 0.0);
}

TEST_CASE("forward with zero adjacency keeps readout at e0") {
  SparseSymMatrix zero(3);
  DenseMatrix e0 = testsupport::random_matrix(3, 4, 2);
  auto s = forward(e0, zero, 3);
  CHECK(max_abs_diff(s.readout, e0) == 0.0);
}

TEST_CASE("forward path graph matches an explicit dense product") {
  auto g = path_graph();
  auto adj = build_norm_adj(g.edges, 1, 2);
  // dense copy of the normalized adjacency
  DenseMatrix dense(3, 3);
  for (const auto& e : adj.entries()) dense.at(e.row, e.col) = e.w;

  DenseMatrix e0 = DenseMatrix::eye(3);
  auto s = forward(e0, adj, 2);
  DenseMatrix expected = add(e0, matmul(dense, e0));
  CHECK(max_abs_diff(s.readout, expected) < 1e-15);

  // readout equals the explicit sum of stored layers exactly
  DenseMatrix layer_sum = s.per_layer[0];
  for (std::size_t l = 1; l < s.per_layer.size(); ++l) add_into(layer_sum, s.per_layer[l]);
  CHECK(max_abs_diff(layer_sum, s.readout) == 0.0);
}

TEST_CASE("forward is linear in e0") {
  auto g = testsupport::random_graph(6, 8, 25, 44, 1);
  auto adj = build_norm_adj(g.edges, 6, 8);
  DenseMatrix x = testsupport::random_matrix(14, 5, 3);
  DenseMatrix y = testsupport::random_matrix(14, 5, 4);
  const double a = 0.3, b = -1.2;
  auto lhs = forward(add(scaled(x, a), scaled(y, b)), adj, 3).readout;
  auto rhs = add(scaled(forward(x, adj, 3).readout, a),
                 scaled(forward(y, adj, 3).readout, b));
  CHECK(max_abs_diff(lhs, rhs) < 1e-10);
}

TEST_CASE("predict_scores dot product semantics") {
  EmbeddingState s;
  s.readout = DenseMatrix(3, 2);
  s.readout.at(0, 0) = 1.0;  // unit vector e1
  s.readout.at(1, 0) = 1.0;  // same unit vector
  s.readout.at(2, 1) = 1.0;  // orthogonal
  CHECK(score_pair(s, 0, 1) == 1.0);
  CHECK(score_pair(s, 0, 2) == 0.0);

  DenseMatrix r = testsupport::random_matrix(4, 4, 9);
  EmbeddingState s2;
  s2.readout = r;
  auto scores = predict_scores(s2, {0, 1, 2, 3}, {0, 1, 2, 3});
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      double expected = 0.0;
      for (int k = 0; k < 4; ++k) expected += r.at(i, k) * r.at(j, k);
      CHECK(scores.at(i, j) == doctest::Approx(expected).epsilon(1e-12));
    }
  CHECK_THROWS_AS(predict_scores(s2, {7}, {0}), ShapeError);
}

TEST_CASE("bpr pair loss is ln 2 at equal scores and vanishes in the limit") {
  EmbeddingState s;
  s.readout = DenseMatrix(3, 1);
  s.readout.at(0, 0) = 1.0;
  s.readout.at(1, 0) = 0.5;
  s.readout.at(2, 0) = 0.5;  // equal pos/neg scores
  BprBatch batch;
  batch.users = {0};
  batch.pos_items = {1};
  batch.neg_items = {2};
  CHECK(bpr_loss(s, batch) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  s.readout.at(1, 0) = 60.0;  // hugely preferred positive
  CHECK(bpr_loss(s, batch) == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("bpr gradient passes finite differences on a small instance") {
  auto g = testsupport::random_graph(5, 5, 12, 77, 1);
  auto adj = build_norm_adj(g.edges, 5, 5);
  DenseMatrix e0 = testsupport::random_matrix(10, 4, 12, -0.5, 0.5);
  BprBatch batch;
  Rng rng(3);
  batch = sample_bpr_batch(g, 6, rng);

  GradientTape tape;
  ValueId e0id = tape.trainable(e0);
  ValueId loss = tape_bpr_loss(tape, tape_readout(tape, e0id, adj, 3), batch);
  tape.backward(loss);

  auto lossFn = [&](const DenseMatrix& probe) {
    GradientTape t;
    ValueId p = t.constant(probe);
    return t.scalar(tape_bpr_loss(t, tape_readout(t, p, adj, 3), batch));
  };
  GradCheckOptions opts;
  opts.tolerance = 1e-4;
  auto report = finite_diff_check(lossFn, e0, tape.grad(e0id), opts);
  CAPTURE(report.summary());
  CHECK(report.pass());
}

TEST_CASE("ssl views: zero perturbation equals the clean readout") {
  auto g = testsupport::random_graph(6, 6, 20, 31, 1);
  DenseMatrix e0 = testsupport::random_matrix(12, 4, 8);
  auto adj = build_norm_adj(g.edges, 6, 6);
  auto clean = forward(e0, adj, 3).readout;

  BackboneConfig sgl;
  sgl.kind = BackboneKind::kSglEd;
  sgl.layers = 3;
  sgl.sgl_drop_rate = 0.0;
  auto [s1, s2] = ssl_views(e0, g.edges, 6, 6, sgl, 5);
  CHECK(max_abs_diff(s1, clean) < 1e-14);
  CHECK(max_abs_diff(s2, clean) < 1e-14);

  BackboneConfig sim;
  sim.kind = BackboneKind::kSimGCL;
  sim.layers = 3;
  sim.simgcl_eps = 0.0;
  auto [m1, m2] = ssl_views(e0, g.edges, 6, 6, sim, 5);
  CHECK(max_abs_diff(m1, clean) < 1e-14);
  CHECK(max_abs_diff(m2, clean) < 1e-14);
}

TEST_CASE("ssl views deterministic under the same seed") {
  auto g = testsupport::random_graph(8, 8, 30, 32, 1);
  DenseMatrix e0 = testsupport::random_matrix(16, 4, 21);
  for (BackboneKind kind : {BackboneKind::kSglEd, BackboneKind::kSimGCL}) {
    BackboneConfig cfg;
    cfg.kind = kind;
    auto [a1, a2] = ssl_views(e0, g.edges, 8, 8, cfg, 99);
    auto [b1, b2] = ssl_views(e0, g.edges, 8, 8, cfg, 99);
    CHECK(max_abs_diff(a1, b1) == 0.0);
    CHECK(max_abs_diff(a2, b2) == 0.0);
  }
  BackboneConfig light;
  CHECK_THROWS_AS(ssl_views(e0, g.edges, 8, 8, light, 1), ContractError);
}

TEST_CASE("sgl edge drop removes the expected count") {
  auto g = testsupport::random_graph(40, 40, 960, 61, 1);
  REQUIRE(g.edges.size() == 1000);
  Rng rng(4);
  auto kept = sgl_edge_drop(g.edges, 0.1, rng);
  CHECK(kept.size() == 900);
}

TEST_CASE("simgcl per-layer deviation stays within eps") {
  auto g = testsupport::random_graph(6, 6, 24, 71, 1);
  DenseMatrix e0 = testsupport::random_matrix(12, 4, 31);
  auto adj = build_norm_adj(g.edges, 6, 6);
  BackboneConfig cfg;
  cfg.kind = BackboneKind::kSimGCL;
  cfg.layers = 2;  // single propagated layer, so view - clean == that layer's noise
  cfg.simgcl_eps = 0.1;
  auto clean = forward(e0, adj, 2).readout;
  auto [v1, v2] = ssl_views(e0, g.edges, 6, 6, cfg, 7);
  CHECK(max_abs_diff(v1, clean) <= cfg.simgcl_eps + 1e-12);
  CHECK(max_abs_diff(v2, clean) <= cfg.simgcl_eps + 1e-12);
}

TEST_CASE("infonce single node loss is zero") {
  DenseMatrix v = testsupport::random_matrix(1, 4, 41);
  CHECK(infonce_loss(v, v, 0.5, 1) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("infonce of identical views over identical nodes is N log N") {
  const int n = 5;
  DenseMatrix v(n, 3);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 3; ++j) v.at(i, j) = 1.0 + j;
  const double loss = infonce_loss(v, v, 1.0, n);  // all nodes in the user group
  CHECK(loss == doctest::Approx(n * std::log(static_cast<double>(n))).epsilon(1e-12));
}

TEST_CASE("infonce decreases when cross-pair similarity drops") {
  // two users: lowering the off-diagonal similarity lowers the loss
  DenseMatrix v1(2, 2), v2(2, 2);
  v1.at(0, 0) = 1.0;
  v1.at(1, 1) = 1.0;
  v2 = v1;
  const double tight = infonce_loss(v1, v2, 1.0, 2);

  DenseMatrix v2_mixed = v2;
  v2_mixed.at(0, 1) = 0.4;  // raises cross similarity with node 1
  const double mixed = infonce_loss(v1, v2_mixed, 1.0, 2);
  CHECK(tight < mixed);
}

TEST_CASE("infonce treats zero-norm rows as cosine zero") {
  DenseMatrix v1(2, 2), v2(2, 2);
  v1.at(0, 0) = 1.0;  // row 1 of v1 is zero
  v2.at(0, 0) = 1.0;
  v2.at(1, 1) = 1.0;
  const double loss = infonce_loss(v1, v2, 1.0, 2);
  CHECK(std::isfinite(loss));
  // row 1: all similarities zero -> term log(2); row 0: -1 + log(e + 1)
  const double expected = (std::log(std::exp(1.0) + 1.0) - 1.0) + std::log(2.0);
  CHECK(loss == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("model_loss with zero ssl weight equals bpr plus regularization") {
  auto g = testsupport::random_graph(6, 12, 20, 91, 1);
  auto adj = build_norm_adj(g.edges, 6, 12);
  DenseMatrix e0 = testsupport::random_matrix(18, 4, 51, -0.5, 0.5);
  Rng rng(5);
  BprBatch batch = sample_bpr_batch(g, 8, rng);

  BackboneConfig cfg;
  cfg.kind = BackboneKind::kSglEd;
  cfg.ssl_weight = 0.0;
  cfg.l2_reg = 1e-4;
  const double full = model_loss(cfg, e0, adj, g.edges, 6, 12, batch, 17);

  const double bpr = bpr_loss(forward(e0, adj, cfg.layers), batch);
  const double reg = cfg.l2_reg * dot_all(e0, e0);
  CHECK(full == doctest::Approx(bpr + reg).epsilon(1e-12));
}

TEST_CASE("model_loss deterministic under seed and invariant to batch order") {
  auto g = testsupport::random_graph(7, 14, 24, 92, 1);
  auto adj = build_norm_adj(g.edges, 7, 14);
  DenseMatrix e0 = testsupport::random_matrix(21, 4, 52, -0.5, 0.5);
  Rng rng(9);
  BprBatch batch = sample_bpr_batch(g, 10, rng);

  BackboneConfig cfg;
  cfg.kind = BackboneKind::kSimGCL;
  const double a = model_loss(cfg, e0, adj, g.edges, 7, 14, batch, 23);
  const double b = model_loss(cfg, e0, adj, g.edges, 7, 14, batch, 23);
  CHECK(a == b);

  BprBatch reversed;
  for (int k = static_cast<int>(batch.size()) - 1; k >= 0; --k) {
    reversed.users.push_back(batch.users[k]);
    reversed.pos_items.push_back(batch.pos_items[k]);
    reversed.neg_items.push_back(batch.neg_items[k]);
  }
  // same SSL seed, permuted pairs: sum reduction is order-invariant
  const double c = model_loss(cfg, e0, adj, g.edges, 7, 14, reversed, 23);
  CHECK(c == doctest::Approx(a).epsilon(1e-12));
}

TEST_CASE("model_loss gradient passes finite differences for all backbones") {
  auto g = testsupport::random_graph(5, 10, 15, 93, 1);
  auto adj = build_norm_adj(g.edges, 5, 10);
  DenseMatrix e0 = testsupport::random_matrix(15, 3, 53, -0.5, 0.5);
  Rng brng(11);
  BprBatch batch = sample_bpr_batch(g, 6, brng);

  for (BackboneKind kind :
       {BackboneKind::kLightGCN, BackboneKind::kSglEd, BackboneKind::kSimGCL}) {
    CAPTURE(to_string(kind));
    BackboneConfig cfg;
    cfg.kind = kind;
    cfg.layers = 2;

    GradientTape tape;
    Rng rng(31);
    ValueId e0id = tape.trainable(e0);
    ValueId loss = tape_model_loss(tape, cfg, e0id, adj, g.edges, 5, 10, batch, rng);
    tape.backward(loss);

    auto lossFn = [&](const DenseMatrix& probe) {
      GradientTape t;
      Rng r(31);
      return t.scalar(
          tape_model_loss(t, cfg, t.constant(probe), adj, g.edges, 5, 10, batch, r));
    };
    GradCheckOptions opts;
    opts.tolerance = 1e-4;
    opts.max_coords = 24;
    auto report = finite_diff_check(lossFn, e0, tape.grad(e0id), opts);
    CAPTURE(report.summary());
    CHECK(report.pass());
  }
}
