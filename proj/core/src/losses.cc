// core/src/losses.cc

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

#include "anchorsv/losses.h"

#include <cmath>

#include "anchorsv/error.h"

namespace anchorsv {

Stage2Terms &Stage2Terms::operator+=(const Stage2Terms &o) {
  k_clean_noise += o.k_clean_noise;
  k_clean_clean += o.k_clean_clean;
  ce_noisy += o.ce_noisy;
  ce_clean += o.ce_clean;
  total += o.total;
  return *this;
}

Stage2Terms &Stage2Terms::operator/=(double n) {
  k_clean_noise /= n;
  k_clean_clean /= n;
  ce_noisy /= n;
  ce_clean /= n;
  total /= n;
  return *this;
}

Stage2Terms &Stage2Terms::operator*=(double s) {
  k_clean_noise *= s;
  k_clean_clean *= s;
  ce_noisy *= s;
  ce_clean *= s;
  total *= s;
  return *this;
}

JointTerms &JointTerms::operator+=(const JointTerms &o) {
  ce_clean += o.ce_clean;
  ce_noisy += o.ce_noisy;
  kernel += o.kernel;
  total += o.total;
  return *this;
}

JointTerms &JointTerms::operator/=(double n) {
  ce_clean /= n;
  ce_noisy /= n;
  kernel /= n;
  total /= n;
  return *this;
}

JointTerms &JointTerms::operator*=(double s) {
  ce_clean *= s;
  ce_noisy *= s;
  kernel *= s;
  total *= s;
  return *this;
}

namespace {

// Cross-entropy at label and, if requested, dCE/dembedding (scaled by
// weight) with the head gradient accumulated into grad_head.
double ClassifyWithGrad(const HeadParams &head, const Vec64 &emb, std::size_t label,
                        const HeadMode &mode, double weight, HeadParams *grad_head,
                        Vec64 *grad_emb) {
  if (label >= head.n_classes())
    Fail(ErrorKind::kInvalidArgument, "label " + std::to_string(label) + " >= " +
                                          std::to_string(head.n_classes()) + " classes");
  Vec64 logits = ForwardLogits(head, emb, mode, label);
  const double loss = CrossEntropy(logits, label);
  if (grad_emb != nullptr) {
    Vec64 g = Softmax(logits);
    g[label] -= 1.0;
    for (double &v : g) v *= weight;
    BackwardLogits(head, emb, mode, label, g, grad_head, grad_emb);
  }
  return loss;
}

void AddScaled(Vec64 &dst, const Vec64 &src, double scale) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
}

void CheckFinite(double v, const char *what) {
  if (!std::isfinite(v)) Fail(ErrorKind::kNonFinite, std::string(what) + " is not finite");
}

}  // namespace

double LossStage1(const HeadParams &head, std::span<const double> embedding,
                  std::size_t label, const HeadMode &mode) {
  if (label >= head.n_classes())
    Fail(ErrorKind::kInvalidArgument, "label out of range");
  return CrossEntropy(ForwardLogits(head, embedding, mode, label), label);
}

double Stage1Batch(const BranchState &branch, std::span<const LabeledInput> batch,
                   const HeadMode &mode, BranchState *grads) {
  if (batch.empty()) Fail(ErrorKind::kInvalidArgument, "empty batch");
  const double w = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  EmbedCache cache;
  Vec64 g_emb;
  for (const LabeledInput &in : batch) {
    Vec64 emb = ForwardEmbed(branch.extractor, *in.frames, grads ? &cache : nullptr);
    total += ClassifyWithGrad(branch.head, emb, in.label, mode, w,
                              grads ? &grads->head : nullptr, grads ? &g_emb : nullptr);
    if (grads != nullptr) BackwardEmbed(branch.extractor, *in.frames, cache, g_emb, &grads->extractor);
  }
  total *= w;
  CheckFinite(total, "stage-1 loss");
  return total;
}

Stage2Terms Stage2Batch(const BranchState &anchor, const BranchState &trainable,
                        std::span<const PairInput> batch, const Stage2Options &opt,
                        BranchState *grads) {
  if (!anchor.frozen) Fail(ErrorKind::kAnchorNotFrozen, "stage-2 anchor branch is trainable");
  if (!(opt.m > 0.0)) Fail(ErrorKind::kInvalidArgument, "kernel scale m must be > 0");
  if (batch.empty()) Fail(ErrorKind::kInvalidArgument, "empty batch");
  const double w = 1.0 / static_cast<double>(batch.size());
  Stage2Terms sum;
  EmbedCache cache_n, cache_c;
  Vec64 dcos_n, dcos_c, g_ce_n, g_ce_c;
  const bool backprop = grads != nullptr;
  for (const PairInput &in : batch) {
    const Vec64 a = in.anchor_clean != nullptr ? *in.anchor_clean
                                               : ForwardEmbed(anchor.extractor, *in.clean);
    const Vec64 tn = ForwardEmbed(trainable.extractor, *in.noisy, backprop ? &cache_n : nullptr);
    const Vec64 tc = ForwardEmbed(trainable.extractor, *in.clean, backprop ? &cache_c : nullptr);

    double dk_n = 0.0, dk_c = 0.0;
    const double cn = CosineWithGrad(a, tn, nullptr, backprop ? &dcos_n : nullptr);
    const double cc = CosineWithGrad(a, tc, nullptr, backprop ? &dcos_c : nullptr);
    Stage2Terms t;
    t.k_clean_noise = AnchorKernelFromCosine(cn, opt.m, &dk_n);
    t.k_clean_clean = AnchorKernelFromCosine(cc, opt.m, &dk_c);
    t.ce_noisy = ClassifyWithGrad(trainable.head, tn, in.label, opt.mode, w,
                                  backprop ? &grads->head : nullptr,
                                  backprop ? &g_ce_n : nullptr);
    if (opt.clean_ce)
      t.ce_clean = ClassifyWithGrad(trainable.head, tc, in.label, opt.mode, w,
                                    backprop ? &grads->head : nullptr,
                                    backprop ? &g_ce_c : nullptr);
    t.total = t.k_clean_noise + t.k_clean_clean + t.ce_noisy + t.ce_clean;
    sum += t;

    if (backprop) {
      AddScaled(g_ce_n, dcos_n, w * dk_n);
      BackwardEmbed(trainable.extractor, *in.noisy, cache_n, g_ce_n, &grads->extractor);
      Vec64 g_c(dcos_c.size(), 0.0);
      AddScaled(g_c, dcos_c, w * dk_c);
      if (opt.clean_ce) AddScaled(g_c, g_ce_c, 1.0);
      BackwardEmbed(trainable.extractor, *in.clean, cache_c, g_c, &grads->extractor);
    }
  }
  sum /= static_cast<double>(batch.size());
  CheckFinite(sum.total, "stage-2 loss");
  return sum;
}

Stage2Terms LossStage2(const BranchState &anchor, const BranchState &trainable,
                       const Mat64 &clean, const Mat64 &noisy, std::size_t label,
                       const Stage2Options &options) {
  const PairInput in{&clean, &noisy, label, nullptr};
  return Stage2Batch(anchor, trainable, std::span(&in, 1), options);
}

JointTerms JointBatch(const BranchState &model, std::span<const PairInput> batch,
                      const JointOptions &opt, BranchState *grads) {
  if (!(opt.m > 0.0)) Fail(ErrorKind::kInvalidArgument, "kernel scale m must be > 0");
  if (opt.weight < 0.0) Fail(ErrorKind::kInvalidArgument, "joint weight must be >= 0");
  if (batch.empty()) Fail(ErrorKind::kInvalidArgument, "empty batch");
  const double w = 1.0 / static_cast<double>(batch.size());
  const bool backprop = grads != nullptr;
  JointTerms sum;
  EmbedCache cache_n, cache_c;
  Vec64 dcos_c, dcos_n, g_c, g_n;
  for (const PairInput &in : batch) {
    const Vec64 ec = ForwardEmbed(model.extractor, *in.clean, backprop ? &cache_c : nullptr);
    const Vec64 en = ForwardEmbed(model.extractor, *in.noisy, backprop ? &cache_n : nullptr);
    JointTerms t;
    t.ce_clean = ClassifyWithGrad(model.head, ec, in.label, opt.mode, w,
                                  backprop ? &grads->head : nullptr, backprop ? &g_c : nullptr);
    t.ce_noisy = ClassifyWithGrad(model.head, en, in.label, opt.mode, w,
                                  backprop ? &grads->head : nullptr, backprop ? &g_n : nullptr);
    double dk = 0.0;
    const double c = CosineWithGrad(ec, en, backprop ? &dcos_c : nullptr,
                                    backprop ? &dcos_n : nullptr);
    t.kernel = AnchorKernelFromCosine(c, opt.m, &dk);
    t.total = t.ce_clean + t.ce_noisy + opt.weight * t.kernel;
    sum += t;
    if (backprop) {
      AddScaled(g_c, dcos_c, w * opt.weight * dk);
      AddScaled(g_n, dcos_n, w * opt.weight * dk);
      BackwardEmbed(model.extractor, *in.clean, cache_c, g_c, &grads->extractor);
      BackwardEmbed(model.extractor, *in.noisy, cache_n, g_n, &grads->extractor);
    }
  }
  sum /= static_cast<double>(batch.size());
  CheckFinite(sum.total, "joint loss");
  return sum;
}

JointTerms LossJoint(const BranchState &model, const Mat64 &clean, const Mat64 &noisy,
                     std::size_t label, const JointOptions &options) {
  const PairInput in{&clean, &noisy, label, nullptr};
  return JointBatch(model, std::span(&in, 1), options);
}

}  // namespace anchorsv
