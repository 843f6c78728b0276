// core/include/anchorsv/losses.h

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

#ifndef ANCHORSV_LOSSES_H_
#define ANCHORSV_LOSSES_H_

#include <cstddef>
#include <span>

#include "anchorsv/model.h"

namespace anchorsv {

/// Cross-entropy of the (possibly margin-adjusted) logits at label.
double LossStage1(const HeadParams &head, std::span<const double> embedding,
                  std::size_t label, const HeadMode &mode);

struct LabeledInput {
  const Mat64 *frames = nullptr;
  std::size_t label = 0;
};

/// Batch-mean classification loss. When grads is non-null the gradient of the
/// mean is accumulated into it.
double Stage1Batch(const BranchState &branch, std::span<const LabeledInput> batch,
                   const HeadMode &mode, BranchState *grads = nullptr);

/// Terms of the anchor-guided objective for one clean/noisy pair:
///   k_clean_noise = K(f(clean), t(noisy)),  k_clean_clean = K(f(clean), t(clean)),
///   ce_noisy = -log p(label | t(noisy)),
/// with K(a, b) = exp(m (1 - cos(a, b))), f the frozen anchor branch and t the
/// trainable one. ce_clean is only nonzero when the optional clean
/// classification term is enabled. total is the sum of all four fields.
struct Stage2Terms {
  double k_clean_noise = 0.0;
  double k_clean_clean = 0.0;
  double ce_noisy = 0.0;
  double ce_clean = 0.0;
  double total = 0.0;

  Stage2Terms &operator+=(const Stage2Terms &o);
  Stage2Terms &operator/=(double n);
  Stage2Terms &operator*=(double s);
};

struct Stage2Options {
  double m = 5.0;
  HeadMode mode;
  bool clean_ce = false;
};

struct PairInput {
  const Mat64 *clean = nullptr;
  const Mat64 *noisy = nullptr;
  std::size_t label = 0;
  /// Optional precomputed anchor embedding of clean. The anchor is frozen, so
  /// this is a pure cache.
  const Vec64 *anchor_clean = nullptr;
};

/// Throws AnchorNotFrozen unless anchor.frozen.
Stage2Terms LossStage2(const BranchState &anchor, const BranchState &trainable,
                       const Mat64 &clean, const Mat64 &noisy, std::size_t label,
                       const Stage2Options &options);

/// Batch mean of the stage-2 terms. Gradients go to the trainable branch
/// only; nothing is ever computed for the anchor.
Stage2Terms Stage2Batch(const BranchState &anchor, const BranchState &trainable,
                        std::span<const PairInput> batch, const Stage2Options &options,
                        BranchState *grads = nullptr);

struct JointTerms {
  double ce_clean = 0.0;
  double ce_noisy = 0.0;
  double kernel = 0.0;  // K(g(clean), g(noisy)), unweighted
  double total = 0.0;   // ce_clean + ce_noisy + weight * kernel

  JointTerms &operator+=(const JointTerms &o);
  JointTerms &operator/=(double n);
  JointTerms &operator*=(double s);
};

struct JointOptions {
  double m = 5.0;
  double weight = 1.0;
  HeadMode mode;
};

/// Single-model baseline: both kernel arguments come from the same trainable
/// model and both receive gradient.
JointTerms LossJoint(const BranchState &model, const Mat64 &clean, const Mat64 &noisy,
                     std::size_t label, const JointOptions &options);

JointTerms JointBatch(const BranchState &model, std::span<const PairInput> batch,
                      const JointOptions &options, BranchState *grads = nullptr);

}  // namespace anchorsv

#endif  // ANCHORSV_LOSSES_H_
