#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "unlrec/backbone.hpp"
#include "unlrec/config.hpp"
#include "unlrec/encoder.hpp"
#include "unlrec/graph.hpp"
#include "unlrec/losses.hpp"

namespace unlrec {

// A backbone snapshot: layer-0 embeddings plus the edge set that defines its
// propagation adjacency.
struct TrainedModel {
  BackboneConfig cfg;
  DenseMatrix e0;
  std::vector<Edge> train_edges;
  std::vector<double> loss_log;  // per-epoch mean loss
  std::uint64_t seed = 0;
};

EmbeddingState model_forward(const TrainedModel& m, int user_count, int item_count);

// Deterministic starting points (seed-derived); training begins from these.
DenseMatrix initial_embeddings(const ExperimentConfig& cfg, int node_count);
InfluenceEncoderState initial_encoder(const ExperimentConfig& cfg, int node_count);

// Adam-trained backbone on the given training graph. Throws NumericError on
// divergence (checkpoints on disk are only ever replaced atomically, so the
// last good one survives an abort).
TrainedModel train_backbone(const ExperimentConfig& cfg, const InteractionGraph& train_graph);

struct PretrainResult {
  InfluenceEncoderState encoder;
  std::vector<std::vector<double>> round_epoch_loss;
};

// Algorithm: per round, sample a simulated unlearning set at rho_sim percent
// and run n_train epochs of the combined objective, updating only h0/weta.
PretrainResult pretrain_ie(const TrainedModel& model, const InteractionGraph& train_graph,
                           const ExperimentConfig& cfg);

// Applying the encoder: revised embeddings on the residual adjacency. Keeps
// the pieces fine-tuning needs (original e0, frozen readout, pre-MLP shift).
struct UnlearnedModel {
  TrainedModel model;  // e0 = revised embeddings, train_edges = residual set
  DenseMatrix original_e0;
  DenseMatrix frozen_readout;
  DenseMatrix delta_e0;
};

UnlearnedModel unlearn(const TrainedModel& model, const InfluenceEncoderState& encoder,
                       const UnlearnRequest& request, int user_count, int item_count);

struct FinetuneResult {
  TrainedModel model;
  InfluenceEncoderState encoder;
  std::vector<double> loss_log;
};

// Minimizes L_M + lambda_u * L_u over the MLP weights and the model's layer-0
// embeddings; h0/weta stay untouched.
FinetuneResult finetune(const UnlearnedModel& um, const InfluenceEncoderState& encoder,
                        const UnlearnRequest& request, const ExperimentConfig& cfg,
                        int user_count, int item_count);

// Fresh initialization, full training on the residual edges only.
TrainedModel retrain_baseline(const ExperimentConfig& cfg, const InteractionGraph& graph,
                              const UnlearnRequest& request);

// ---- checkpointing (shared format: one .mat per parameter + manifest) ----

void save_model(const std::string& dir, const std::string& name, const TrainedModel& m);
TrainedModel load_model(const std::string& dir, const std::string& name,
                        const BackboneConfig& cfg, std::vector<Edge> train_edges);

void save_encoder(const std::string& dir, const std::string& name,
                  const InfluenceEncoderState& enc);
InfluenceEncoderState load_encoder(const std::string& dir, const std::string& name);

}  // namespace unlrec
