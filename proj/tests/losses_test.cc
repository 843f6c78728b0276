// tests/losses_test.cc

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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "anchorsv/losses.h"
#include "anchorsv/model.h"
#include "anchorsv/rng.h"
#include "test_util.h"

namespace anchorsv {
namespace {

using testing::RandomMat;

ModelConfig SmallConfig() {
  ModelConfig c;
  c.input_dim = 5;
  c.hidden_dim = 6;
  c.embed_dim = 4;
  c.n_classes = 3;
  return c;
}

// Branch whose embedding is the constant vector e for every input.
BranchState ConstantEmbedding(const ModelConfig &c, const Vec64 &e, std::uint64_t seed) {
  BranchState b = InitBranch(c, seed);
  b.extractor.wp.SetZero();
  b.extractor.bp = e;
  return b;
}

TEST(Stage1LossTest, UniformLogitsGiveLogS) {
  HeadParams head{Mat64(4, 2, 0.0), {}};
  Vec64 e = {1.0, -2.0};
  EXPECT_NEAR(LossStage1(head, e, 2, HeadMode::Softmax()), 1.3862943611198906, 1e-15);
}

TEST(Stage1LossTest, TwoClassHandValue) {
  HeadParams head{Mat64(2, 2, std::vector<double>{1, 0, 0, 0}), {}};
  Vec64 e = {1.0, 0.0};
  EXPECT_NEAR(LossStage1(head, e, 0, HeadMode::Softmax()), 0.3132616875182228, 1e-15);
}

TEST(Stage1LossTest, DominantLogitDrivesLossToZero) {
  HeadParams head{Mat64(3, 3, std::vector<double>{1, 0, 0, 0, 1, 0, 0, 0, 1}), {}};
  Vec64 e = {1.0, 0.2, -0.1};
  double prev = std::numeric_limits<double>::infinity();
  for (double scale : {1.0, 5.0, 20.0, 60.0}) {
    double loss = LossStage1(head, e, 0, HeadMode::Aam(0.1, scale));
    EXPECT_LT(loss, prev);
    prev = loss;
  }
  EXPECT_LT(prev, 1e-12);
}

TEST(Stage1LossTest, ZeroEmbeddingThrowsInAamMode) {
  HeadParams head{Mat64(2, 2, 1.0), {}};
  EXPECT_ERROR_KIND(LossStage1(head, Vec64{0.0, 0.0}, 0, HeadMode::Aam(0.2, 30)),
                    ErrorKind::kZeroVector);
}

TEST(Stage2LossTest, IdenticalBranchesAndInputs) {
  Rng rng(1);
  BranchState base = InitBranch(SmallConfig(), 1);
  BranchState anchor = CloneAndFreeze(base);
  Mat64 x = RandomMat(rng, 6, 5);
  Stage2Options opt;
  Stage2Terms t = LossStage2(anchor, base, x, x, 1, opt);
  EXPECT_EQ(t.k_clean_noise, 1.0);
  EXPECT_EQ(t.k_clean_clean, 1.0);
  EXPECT_EQ(t.ce_clean, 0.0);
  EXPECT_EQ(t.total, 2.0 + t.ce_noisy);
  EXPECT_NEAR(t.ce_noisy, LossStage1(base.head, ForwardEmbed(base.extractor, x), 1, opt.mode),
              1e-15);
}

TEST(Stage2LossTest, OrthogonalEmbeddingsGiveExpM) {
  ModelConfig c = SmallConfig();
  BranchState anchor = CloneAndFreeze(ConstantEmbedding(c, {1, 0, 0, 0}, 1));
  BranchState trainable = ConstantEmbedding(c, {0, 2, 0, 0}, 2);
  Rng rng(2);
  Mat64 clean = RandomMat(rng, 6, 5), noisy = RandomMat(rng, 6, 5);
  Stage2Terms t = LossStage2(anchor, trainable, clean, noisy, 0, Stage2Options{});
  EXPECT_NEAR(t.k_clean_noise, 148.4131591025766, 1e-9);
  EXPECT_NEAR(t.k_clean_clean, 148.4131591025766, 1e-9);
}

TEST(Stage2LossTest, RequiresFrozenAnchor) {
  BranchState base = InitBranch(SmallConfig(), 1);
  Mat64 x(6, 5, 0.3);
  EXPECT_ERROR_KIND(LossStage2(base, base, x, x, 0, Stage2Options{}),
                    ErrorKind::kAnchorNotFrozen);
}

TEST(Stage2LossTest, TotalIsSumOfTerms) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    BranchState anchor = CloneAndFreeze(InitBranch(SmallConfig(), seed));
    BranchState trainable = InitBranch(SmallConfig(), seed + 100);
    Mat64 clean = RandomMat(rng, 6, 5), noisy = RandomMat(rng, 6, 5);
    for (bool clean_ce : {false, true}) {
      Stage2Options opt;
      opt.clean_ce = clean_ce;
      Stage2Terms t = LossStage2(anchor, trainable, clean, noisy, 2, opt);
      EXPECT_NEAR(t.total, t.k_clean_noise + t.k_clean_clean + t.ce_noisy + t.ce_clean, 1e-12);
      EXPECT_GE(t.k_clean_noise, 1.0);
      EXPECT_GE(t.k_clean_clean, 1.0);
      EXPECT_GE(t.k_clean_noise + t.k_clean_clean, 2.0);
      EXPECT_EQ(t.ce_clean > 0.0, clean_ce);
    }
  }
}

TEST(Stage2LossTest, AnchorScaleInvariance) {
  Rng rng(3);
  BranchState base = InitBranch(SmallConfig(), 3);
  for (double &b : base.extractor.bp) b = 0.2 * rng.Gaussian();
  BranchState trainable = InitBranch(SmallConfig(), 4);
  Mat64 clean = RandomMat(rng, 6, 5), noisy = RandomMat(rng, 6, 5);
  Stage2Terms ref = LossStage2(CloneAndFreeze(base), trainable, clean, noisy, 0, Stage2Options{});
  for (double alpha : {0.01, 0.5, 3.0, 1000.0}) {
    BranchState scaled = base;
    for (double &w : scaled.extractor.wp.flat()) w *= alpha;
    for (double &b : scaled.extractor.bp) b *= alpha;
    Stage2Terms t = LossStage2(CloneAndFreeze(scaled), trainable, clean, noisy, 0, Stage2Options{});
    EXPECT_NEAR(t.k_clean_noise, ref.k_clean_noise, 1e-12);
    EXPECT_NEAR(t.k_clean_clean, ref.k_clean_clean, 1e-12);
  }
}

TEST(Stage2LossTest, DecreasingInCosine) {
  ModelConfig c = SmallConfig();
  BranchState anchor = CloneAndFreeze(ConstantEmbedding(c, {1, 0, 0, 0}, 1));
  Mat64 x(6, 5, 0.1);
  double prev = -1.0;
  for (double theta = 0.0; theta <= std::numbers::pi + 1e-9; theta += std::numbers::pi / 16) {
    BranchState t = ConstantEmbedding(c, {std::cos(theta), std::sin(theta), 0, 0}, 1);
    Stage2Terms terms = LossStage2(anchor, t, x, x, 0, Stage2Options{});
    double loss = terms.k_clean_noise + terms.k_clean_clean;
    if (theta > 0) EXPECT_GT(loss, prev) << theta;
    prev = loss;
  }
}

struct PairBatch {
  std::vector<Mat64> clean, noisy;
  std::vector<PairInput> inputs;
};

PairBatch RandomPairs(Rng &rng, const ModelConfig &c, int n) {
  PairBatch b;
  for (int i = 0; i < n; ++i) {
    b.clean.push_back(RandomMat(rng, 6, c.input_dim));
    Mat64 noisy = b.clean.back();
    for (double &v : noisy.flat()) v += 0.5 * rng.Gaussian();
    b.noisy.push_back(noisy);
  }
  for (int i = 0; i < n; ++i)
    b.inputs.push_back({&b.clean[i], &b.noisy[i], static_cast<std::size_t>(i) % c.n_classes,
                        nullptr});
  return b;
}

TEST(Stage2LossTest, GradientsMatchFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    ModelConfig c = SmallConfig();
    BranchState anchor = CloneAndFreeze(InitBranch(c, seed));
    BranchState trainable = InitBranch(c, seed + 1000);
    PairBatch batch = RandomPairs(rng, c, 3);
    for (bool clean_ce : {false, true}) {
      Stage2Options opt;
      opt.clean_ce = clean_ce;
      BranchState grads = ZerosLike(trainable);
      Stage2Batch(anchor, trainable, batch.inputs, opt, &grads);
      auto f = [&](std::span<const double> x) {
        BranchState t = trainable;
        Unflatten(x, &t);
        return Stage2Batch(anchor, t, batch.inputs, opt).total;
      };
      EXPECT_LT(GradCheck(f, Flatten(trainable), Flatten(grads)), 1e-4) << seed;
    }
  }
}

TEST(Stage2LossTest, AnchorCacheMatchesLiveAnchor) {
  Rng rng(6);
  ModelConfig c = SmallConfig();
  BranchState anchor = CloneAndFreeze(InitBranch(c, 6));
  BranchState trainable = InitBranch(c, 7);
  PairBatch batch = RandomPairs(rng, c, 4);
  std::vector<Vec64> cached;
  for (const Mat64 &m : batch.clean) cached.push_back(ForwardEmbed(anchor.extractor, m));
  std::vector<PairInput> with_cache = batch.inputs;
  for (std::size_t i = 0; i < with_cache.size(); ++i) with_cache[i].anchor_clean = &cached[i];
  BranchState g1 = ZerosLike(trainable), g2 = ZerosLike(trainable);
  Stage2Terms a = Stage2Batch(anchor, trainable, batch.inputs, Stage2Options{}, &g1);
  Stage2Terms b = Stage2Batch(anchor, trainable, with_cache, Stage2Options{}, &g2);
  EXPECT_EQ(a.total, b.total);
  EXPECT_EQ(Flatten(g1), Flatten(g2));
}

TEST(JointLossTest, ZeroWeightIsTwoClassificationLosses) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    BranchState model = InitBranch(SmallConfig(), seed);
    Mat64 clean = RandomMat(rng, 6, 5), noisy = RandomMat(rng, 6, 5);
    JointOptions opt;
    opt.weight = 0.0;
    JointTerms t = LossJoint(model, clean, noisy, 1, opt);
    double expected = LossStage1(model.head, ForwardEmbed(model.extractor, clean), 1, opt.mode) +
                      LossStage1(model.head, ForwardEmbed(model.extractor, noisy), 1, opt.mode);
    EXPECT_NEAR(t.total, expected, 1e-12);
  }
}

TEST(JointLossTest, IdenticalInputsGiveUnitKernel) {
  Rng rng(2);
  BranchState model = InitBranch(SmallConfig(), 2);
  Mat64 x = RandomMat(rng, 6, 5);
  JointTerms t = LossJoint(model, x, x, 0, JointOptions{});
  EXPECT_EQ(t.kernel, 1.0);
  EXPECT_NEAR(t.total, t.ce_clean + t.ce_noisy + 1.0, 1e-12);
}

TEST(JointLossTest, GradientsMatchFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    ModelConfig c = SmallConfig();
    BranchState model = InitBranch(c, seed + 500);
    PairBatch batch = RandomPairs(rng, c, 3);
    JointOptions opt;
    opt.weight = 1.5;
    BranchState grads = ZerosLike(model);
    JointBatch(model, batch.inputs, opt, &grads);
    auto f = [&](std::span<const double> x) {
      BranchState b = model;
      Unflatten(x, &b);
      return JointBatch(b, batch.inputs, opt).total;
    };
    EXPECT_LT(GradCheck(f, Flatten(model), Flatten(grads)), 1e-4) << seed;
  }
}

TEST(JointLossTest, KernelGradientReachesBothArguments) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    ModelConfig c = SmallConfig();
    BranchState model = InitBranch(c, seed + 700);
    PairBatch batch = RandomPairs(rng, c, 2);
    JointOptions with, without;
    without.weight = 0.0;
    BranchState g1 = ZerosLike(model), g0 = ZerosLike(model);
    JointBatch(model, batch.inputs, with, &g1);
    JointBatch(model, batch.inputs, without, &g0);
    Vec64 kernel_grad = Flatten(g1), base = Flatten(g0);
    for (std::size_t i = 0; i < kernel_grad.size(); ++i) kernel_grad[i] -= base[i];
    auto kernel = [&](std::span<const double> x) {
      BranchState b = model;
      Unflatten(x, &b);
      return JointBatch(b, batch.inputs, with).kernel;
    };
    EXPECT_LT(GradCheck(kernel, Flatten(model), kernel_grad), 1e-4) << seed;
  }
}

TEST(JointLossTest, RejectsBadOptions) {
  BranchState model = InitBranch(SmallConfig(), 2);
  Mat64 x(6, 5, 0.2);
  JointOptions opt;
  opt.weight = -1.0;
  EXPECT_ERROR_KIND(LossJoint(model, x, x, 0, opt), ErrorKind::kInvalidArgument);
  opt.weight = 1.0;
  opt.m = 0.0;
  EXPECT_ERROR_KIND(LossJoint(model, x, x, 0, opt), ErrorKind::kInvalidArgument);
}

}  // namespace
}  // namespace anchorsv
