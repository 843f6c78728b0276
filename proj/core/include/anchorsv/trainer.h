// core/include/anchorsv/trainer.h

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

#ifndef ANCHORSV_TRAINER_H_
#define ANCHORSV_TRAINER_H_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "anchorsv/config.h"
#include "anchorsv/datagen.h"
#include "anchorsv/losses.h"
#include "anchorsv/model.h"

namespace anchorsv {

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  // Epoch means of the stage-2 terms; for joint runs k_clean_noise holds the
  // live-live kernel and ce the summed classification terms. Zero for stage 1.
  double k_clean_noise = 0.0;
  double k_clean_clean = 0.0;
  double ce = 0.0;
  double learning_rate = 0.0;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  /// Stage 2: batch-mean terms of the first forward pass, before any update.
  std::optional<Stage2Terms> first_batch;
  /// Stage 2: smallest batch-mean k_clean_noise + k_clean_clean seen.
  double min_batch_kernel = 0.0;
  long long steps = 0;

  /// "epoch,loss,k_cn,k_cc,ce,lr" header plus one row per epoch.
  std::string ToCsv() const;
};

/// SGD with classical momentum. Refuses to touch a frozen branch.
class Sgd {
 public:
  Sgd(const BranchState &shape, double momentum);
  void Step(BranchState *params, const BranchState &grads, double learning_rate);

 private:
  BranchState velocity_;
  double momentum_;
};

struct TrainResult {
  BranchState branch;
  TrainLog log;
};

struct Stage2Result {
  BranchState trainable;
  BranchState anchor;
  std::string anchor_digest_at_clone;
  TrainLog log;
};

/// Called after every optimizer step with the 1-based step index.
using StepHook = std::function<void(long long step)>;

TrainResult TrainStage1(const TrainConfig &config, const Dataset &train);
Stage2Result TrainStage2(const TrainConfig &config, const Dataset &train,
                         const BranchState &base, const StepHook &hook = {});
TrainResult TrainJoint(const TrainConfig &config, const Dataset &train);

}  // namespace anchorsv

#endif  // ANCHORSV_TRAINER_H_
