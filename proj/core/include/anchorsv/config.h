// core/include/anchorsv/config.h

// Copyright 2026  The anchorsv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef ANCHORSV_CONFIG_H_
#define ANCHORSV_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "anchorsv/datagen.h"
#include "anchorsv/model.h"

namespace anchorsv {

enum class Stage { kStage1, kStage2, kJoint };
std::string_view StageName(Stage stage);  // "1", "2", "joint"
Stage ParseStage(std::string_view text);

/// Hyperparameters of every training mode. Defaults are the desk-scale
/// reference configuration.
struct TrainConfig {
  std::uint64_t seed = 1;
  Stage stage = Stage::kStage1;
  int epochs = 30;
  int batch_size = 64;
  double learning_rate = 0.05;
  double momentum = 0.9;
  int lr_decay_every = 0;  // epochs; 0 keeps the rate constant
  double lr_decay_factor = 0.5;
  double m = 5.0;
  HeadMode head_mode;
  double snr_min = 0.0;
  double snr_max = 20.0;
  std::vector<NoiseKind> noise_kinds = AllNoiseKinds();
  /// Stage 1: probability that an utterance stays clean in a given epoch.
  double clean_prob = 0.5;
  /// Stage 2 / joint: noisy copies drawn per clean utterance per epoch.
  int noisy_copies = 1;
  double joint_weight = 1.0;
  bool stage2_clean_ce = false;
  bool stage2_reinit_head = false;
  std::size_t hidden_dim = 32;
  std::size_t embed_dim = 32;
  bool head_bias = false;

  /// Throws InvalidArgument naming the first offending key.
  void Validate() const;
  ModelConfig ModelFor(std::size_t input_dim, std::size_t n_classes) const;
};

/// Applies one "key = value" assignment. Throws InvalidArgument for unknown
/// keys or unparsable values.
void ApplyConfigValue(TrainConfig *config, std::string_view key, std::string_view value);

/// Parses key = value lines; blank lines and '#' comments are ignored.
TrainConfig ParseConfig(std::string_view text, TrainConfig base = {});
TrainConfig LoadConfig(const std::filesystem::path &path, TrainConfig base = {});

/// Canonical text form: every key, fixed order. ParseConfig(ConfigToText(c))
/// reproduces c.
std::string ConfigToText(const TrainConfig &config);

}  // namespace anchorsv

#endif  // ANCHORSV_CONFIG_H_
