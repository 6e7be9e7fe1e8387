#include "unlrec/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "unlrec/adam.hpp"
#include "unlrec/checkpoint.hpp"
#include "unlrec/errors.hpp"

namespace unlrec {

namespace {

constexpr std::uint64_t kInitTag = 0x11;
constexpr std::uint64_t kEpochTag = 0x1000;
constexpr std::uint64_t kPretrainInitTag = 0x22;
constexpr std::uint64_t kRoundTag = 0x2000;
constexpr std::uint64_t kFinetuneTag = 0x33;

double check_finite_loss(double loss, const char* where) {
  if (!std::isfinite(loss))
    throw NumericError(std::string(where) + ": non-finite loss " + std::to_string(loss));
  return loss;
}

}  // namespace

EmbeddingState model_forward(const TrainedModel& m, int user_count, int item_count) {
  return forward(m.e0, build_norm_adj(m.train_edges, user_count, item_count),
                 m.cfg.layers);
}

DenseMatrix initial_embeddings(const ExperimentConfig& cfg, int node_count) {
  Rng rng(derive_seed(cfg.seed, kInitTag));
  return DenseMatrix::random_uniform(node_count, cfg.backbone.embed_dim, -0.1, 0.1, rng);
}

InfluenceEncoderState initial_encoder(const ExperimentConfig& cfg, int node_count) {
  return InfluenceEncoderState::init(node_count, cfg.backbone.embed_dim, cfg.encoder,
                                     derive_seed(cfg.seed, kPretrainInitTag));
}

TrainedModel train_backbone(const ExperimentConfig& cfg, const InteractionGraph& train_graph) {
  TrainedModel m;
  m.cfg = cfg.backbone;
  m.seed = cfg.seed;
  m.train_edges = train_graph.edges;
  m.e0 = initial_embeddings(cfg, train_graph.node_count());

  const SparseSymMatrix adj =
      build_norm_adj(train_graph.edges, train_graph.user_count, train_graph.item_count);

  AdamState adam(cfg.train_lr);
  adam.register_param("e0", m.e0.rows, m.e0.cols);

  std::vector<Edge> order = train_graph.edges;
  const auto batch_len = static_cast<std::size_t>(std::max(1, cfg.batch_size));

  for (int epoch = 0; epoch < cfg.train_epochs; ++epoch) {
    Rng rng(derive_seed(cfg.seed, kEpochTag + static_cast<std::uint64_t>(epoch)));
    rng.shuffle(order);
    double epoch_loss = 0.0;
    int batches = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += batch_len) {
      const std::size_t len = std::min(batch_len, order.size() - begin);
      BprBatch batch = batch_from_slice(train_graph, order, begin, len, rng);
      GradientTape tape;
      ValueId e0 = tape.trainable(m.e0);
      ValueId loss = tape_model_loss(tape, cfg.backbone, e0, adj, train_graph.edges,
                                     train_graph.user_count, train_graph.item_count,
                                     batch, rng);
      epoch_loss += check_finite_loss(tape.scalar(loss), "train_backbone");
      tape.backward(loss);
      adam_step(adam, {&m.e0}, {&tape.grad(e0)});
      ++batches;
    }
    m.loss_log.push_back(epoch_loss / std::max(1, batches));
  }
  if (!m.e0.all_finite()) throw NumericError("train_backbone: non-finite embeddings");
  return m;
}

PretrainResult pretrain_ie(const TrainedModel& model, const InteractionGraph& train_graph,
                           const ExperimentConfig& cfg) {
  const int I = train_graph.user_count;
  const int J = train_graph.item_count;
  const DenseMatrix frozen_readout = model_forward(model, I, J).readout;

  PretrainResult res;
  res.encoder = initial_encoder(cfg, train_graph.node_count());
  InfluenceEncoderState& enc = res.encoder;

  AdamState adam(cfg.pretrain_lr);
  adam.register_param("h0", enc.h0.rows, enc.h0.cols);
  adam.register_param("weta", enc.weta.rows, enc.weta.cols);

  const auto batch_len = static_cast<std::size_t>(std::max(1, cfg.batch_size));

  for (int round = 0; round < cfg.n_pretrain; ++round) {
    Rng round_rng(derive_seed(cfg.seed, kRoundTag + static_cast<std::uint64_t>(round)));
    UnlearnRequest request = sample_unlearn_set(train_graph, cfg.rho_sim, round_rng);
    InteractionGraph residual = make_graph(I, J, request.residual_edges);

    std::vector<double> epoch_losses;
    std::vector<Edge> order = request.residual_edges;
    for (int epoch = 0; epoch < cfg.n_train; ++epoch) {
      Rng rng(derive_seed(cfg.seed, kRoundTag + 7919ULL * (round + 1) +
                                        static_cast<std::uint64_t>(epoch)));
      rng.shuffle(order);
      double epoch_loss = 0.0;
      int batches = 0;
      for (std::size_t begin = 0; begin < order.size(); begin += batch_len) {
        const std::size_t len = std::min(batch_len, order.size() - begin);
        BprBatch batch = batch_from_slice(residual, order, begin, len, rng);
        GradientTape tape;
        EncoderLeaves leaves = make_encoder_leaves(tape, enc, true, false);
        ValueId e0 = tape.constant(model.e0);
        TotalLossResult total =
            build_total_loss(tape, cfg.backbone, enc.hyper, leaves, e0, frozen_readout,
                             request, cfg.weights, batch, I, J, rng);
        epoch_loss += check_finite_loss(total.total, "pretrain_ie");
        tape.backward(total.loss);
        adam_step(adam, {&enc.h0, &enc.weta},
                  {&tape.grad(leaves.h0), &tape.grad(leaves.weta)});
        ++batches;
      }
      epoch_losses.push_back(epoch_loss / std::max(1, batches));
    }
    res.round_epoch_loss.push_back(std::move(epoch_losses));
  }
  return res;
}

UnlearnedModel unlearn(const TrainedModel& model, const InfluenceEncoderState& encoder,
                       const UnlearnRequest& request, int user_count, int item_count) {
  UnlearnedModel um;
  um.original_e0 = model.e0;
  um.frozen_readout = model_forward(model, user_count, item_count).readout;

  const DenseMatrix h_bar = propagate_iem(encoder, request.idm_norm);
  const DenseMatrix e_w = propagate_weighted(encoder, request.idm_norm, um.frozen_readout);
  um.delta_e0 = sub(h_bar, e_w);

  um.model.cfg = model.cfg;
  um.model.seed = model.seed;
  um.model.train_edges = request.residual_edges;
  um.model.e0 = add(mlp_forward(encoder, um.delta_e0), model.e0);
  return um;
}

FinetuneResult finetune(const UnlearnedModel& um, const InfluenceEncoderState& encoder,
                        const UnlearnRequest& request, const ExperimentConfig& cfg,
                        int user_count, int item_count) {
  FinetuneResult res;
  res.encoder = encoder;
  res.model = um.model;

  DenseMatrix e0 = um.original_e0;
  InfluenceEncoderState& enc = res.encoder;

  AdamState adam(cfg.finetune_lr);
  std::vector<DenseMatrix*> params;
  for (std::size_t l = 0; l < enc.mlp_w.size(); ++l) {
    adam.register_param("mlp_w" + std::to_string(l), enc.mlp_w[l].rows, enc.mlp_w[l].cols);
    params.push_back(&enc.mlp_w[l]);
  }
  for (std::size_t l = 0; l < enc.mlp_b.size(); ++l) {
    adam.register_param("mlp_b" + std::to_string(l), enc.mlp_b[l].rows, enc.mlp_b[l].cols);
    params.push_back(&enc.mlp_b[l]);
  }
  adam.register_param("e0", e0.rows, e0.cols);
  params.push_back(&e0);

  InteractionGraph residual = make_graph(user_count, item_count, request.residual_edges);
  LossWeights ft_weights;  // only the model and unlearning terms
  ft_weights.lambda_u = cfg.weights.lambda_u;
  ft_weights.lambda_p = 0.0;
  ft_weights.lambda_c = 0.0;

  std::vector<Edge> order = request.residual_edges;
  const auto batch_len = static_cast<std::size_t>(std::max(1, cfg.batch_size));

  for (int epoch = 0; epoch < cfg.finetune_epochs; ++epoch) {
    Rng rng(derive_seed(cfg.seed, kFinetuneTag + 131ULL * (epoch + 1)));
    rng.shuffle(order);
    double epoch_loss = 0.0;
    int batches = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += batch_len) {
      const std::size_t len = std::min(batch_len, order.size() - begin);
      BprBatch batch = batch_from_slice(residual, order, begin, len, rng);
      GradientTape tape;
      EncoderLeaves leaves = make_encoder_leaves(tape, enc, false, true);
      ValueId e0_leaf = tape.trainable(e0);
      TotalLossResult total =
          build_total_loss(tape, cfg.backbone, enc.hyper, leaves, e0_leaf,
                           um.frozen_readout, request, ft_weights, batch, user_count,
                           item_count, rng);
      epoch_loss += check_finite_loss(total.total, "finetune");
      tape.backward(total.loss);
      std::vector<const DenseMatrix*> grads;
      for (ValueId id : leaves.mlp_w) grads.push_back(&tape.grad(id));
      for (ValueId id : leaves.mlp_b) grads.push_back(&tape.grad(id));
      grads.push_back(&tape.grad(e0_leaf));
      adam_step(adam, params, grads);
      ++batches;
    }
    res.loss_log.push_back(epoch_loss / std::max(1, batches));
  }

  res.model.e0 = add(mlp_forward(enc, um.delta_e0), e0);
  if (!res.model.e0.all_finite()) throw NumericError("finetune: non-finite embeddings");
  return res;
}

TrainedModel retrain_baseline(const ExperimentConfig& cfg, const InteractionGraph& graph,
                              const UnlearnRequest& request) {
  InteractionGraph residual =
      make_graph(graph.user_count, graph.item_count, request.residual_edges);
  return train_backbone(cfg, residual);
}

void save_model(const std::string& dir, const std::string& name, const TrainedModel& m) {
  ensure_dir(dir);
  write_matrix_file(dir + "/" + name + ".e0.mat", m.e0);
  KvList kv;
  kv.emplace_back("param.e0", std::to_string(m.e0.rows) + "x" + std::to_string(m.e0.cols));
  kv.emplace_back("backbone", to_string(m.cfg.kind));
  kv.emplace_back("embed_dim", std::to_string(m.cfg.embed_dim));
  kv.emplace_back("layers", std::to_string(m.cfg.layers));
  kv.emplace_back("seed", std::to_string(m.seed));
  kv.emplace_back("train_edges", std::to_string(m.train_edges.size()));
  kv.emplace_back("epochs_logged", std::to_string(m.loss_log.size()));
  write_kv_file(dir + "/" + name + ".manifest.txt", kv);
}

TrainedModel load_model(const std::string& dir, const std::string& name,
                        const BackboneConfig& cfg, std::vector<Edge> train_edges) {
  const std::string matpath = dir + "/" + name + ".e0.mat";
  if (!file_exists(matpath)) throw MissingArtifact("missing checkpoint: " + matpath);
  TrainedModel m;
  m.cfg = cfg;
  m.e0 = read_matrix_file(matpath);
  m.train_edges = std::move(train_edges);
  const KvList kv = read_kv_file(dir + "/" + name + ".manifest.txt");
  m.seed = std::stoull(kv_get(kv, "seed"));
  return m;
}

void save_encoder(const std::string& dir, const std::string& name,
                  const InfluenceEncoderState& enc) {
  ensure_dir(dir);
  write_matrix_file(dir + "/" + name + ".h0.mat", enc.h0);
  write_matrix_file(dir + "/" + name + ".weta.mat", enc.weta);
  for (std::size_t l = 0; l < enc.mlp_w.size(); ++l) {
    write_matrix_file(dir + "/" + name + ".mlp_w" + std::to_string(l) + ".mat",
                      enc.mlp_w[l]);
    write_matrix_file(dir + "/" + name + ".mlp_b" + std::to_string(l) + ".mat",
                      enc.mlp_b[l]);
  }
  KvList kv;
  kv.emplace_back("iem_layers", std::to_string(enc.hyper.iem_layers));
  kv.emplace_back("weighted_layers", std::to_string(enc.hyper.weighted_layers));
  kv.emplace_back("mlp_layers", std::to_string(enc.hyper.mlp_layers));
  kv.emplace_back("dim", std::to_string(enc.dim()));
  kv.emplace_back("nodes", std::to_string(enc.node_count()));
  kv.emplace_back("param.h0", std::to_string(enc.h0.rows) + "x" + std::to_string(enc.h0.cols));
  kv.emplace_back("param.weta", std::to_string(enc.weta.rows) + "x1");
  write_kv_file(dir + "/" + name + ".manifest.txt", kv);
}

InfluenceEncoderState load_encoder(const std::string& dir, const std::string& name) {
  const std::string manifest = dir + "/" + name + ".manifest.txt";
  if (!file_exists(manifest)) throw MissingArtifact("missing checkpoint: " + manifest);
  const KvList kv = read_kv_file(manifest);
  InfluenceEncoderState enc;
  enc.hyper.iem_layers = std::stoi(kv_get(kv, "iem_layers"));
  enc.hyper.weighted_layers = std::stoi(kv_get(kv, "weighted_layers"));
  enc.hyper.mlp_layers = std::stoi(kv_get(kv, "mlp_layers"));
  enc.h0 = read_matrix_file(dir + "/" + name + ".h0.mat");
  enc.weta = read_matrix_file(dir + "/" + name + ".weta.mat");
  for (int l = 0; l < enc.hyper.mlp_layers; ++l) {
    enc.mlp_w.push_back(
        read_matrix_file(dir + "/" + name + ".mlp_w" + std::to_string(l) + ".mat"));
    enc.mlp_b.push_back(
        read_matrix_file(dir + "/" + name + ".mlp_b" + std::to_string(l) + ".mat"));
  }
  return enc;
}

}  // namespace unlrec
