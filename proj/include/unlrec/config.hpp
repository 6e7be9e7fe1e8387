#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "unlrec/backbone.hpp"
#include "unlrec/checkpoint.hpp"
#include "unlrec/encoder.hpp"
#include "unlrec/losses.hpp"

namespace unlrec {

struct ExperimentConfig {
  std::string dataset;
  double test_fraction = 0.2;
  std::uint64_t seed = 42;

  BackboneConfig backbone;
  EncoderHyper encoder;
  LossWeights weights;

  int batch_size = 1024;
  int train_epochs = 40;
  double train_lr = 1e-3;

  double attack_percent = 1.0;  // adversarial edges as % of training edges

  double rho_sim = 5.0;  // simulated unlearning % per pre-training round
  int n_pretrain = 15;   // simulation rounds
  int n_train = 10;      // epochs per round
  double pretrain_lr = 1e-2;

  int finetune_epochs = 5;
  double finetune_lr = 1e-3;

  int top_n = 20;
  std::string unlearn_edges;  // optional explicit request file; attack manifest otherwise
};

// key=value config files, '#' comments. Unknown keys and unparsable values
// raise ParseError naming the key and line. Overrides ("key=value") win.
ExperimentConfig parse_config(const std::string& path,
                              const std::vector<std::string>& overrides);
ExperimentConfig parse_config_text(const std::string& text, const std::string& source,
                                   const std::vector<std::string>& overrides);

// Fully resolved config as ordered key=value pairs (run manifest echo).
KvList echo_config(const ExperimentConfig& cfg);

}  // namespace unlrec
