// core/src/trainer.cc

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

#include "anchorsv/trainer.h"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "anchorsv/corpus_io.h"
#include "anchorsv/error.h"
#include "anchorsv/rng.h"

namespace anchorsv {

std::string TrainLog::ToCsv() const {
  std::ostringstream os;
  os << "epoch,loss,k_cn,k_cc,ce,lr\n";
  for (const EpochRecord &r : epochs)
    os << r.epoch << ',' << FormatDouble(r.loss) << ',' << FormatDouble(r.k_clean_noise) << ','
       << FormatDouble(r.k_clean_clean) << ',' << FormatDouble(r.ce) << ','
       << FormatDouble(r.learning_rate) << '\n';
  return os.str();
}

Sgd::Sgd(const BranchState &shape, double momentum)
    : velocity_(ZerosLike(shape)), momentum_(momentum) {}

void Sgd::Step(BranchState *params, const BranchState &grads, double lr) {
  auto p = MutableBlocks(*params);  // throws on a frozen branch
  auto v = MutableBlocks(velocity_);
  auto g = Blocks(grads);
  if (p.size() != g.size() || p.size() != v.size())
    Fail(ErrorKind::kShapeMismatch, "optimizer block layout mismatch");
  for (std::size_t b = 0; b < p.size(); ++b) {
    auto pv = p[b].values;
    auto vv = v[b].values;
    auto gv = g[b].values;
    for (std::size_t i = 0; i < pv.size(); ++i) {
      vv[i] = momentum_ * vv[i] + gv[i];
      pv[i] -= lr * vv[i];
    }
  }
}

namespace {

// Seed streams, all derived from TrainConfig::seed.
enum Stream : std::uint64_t {
  kShuffle = 10,
  kAugment = 11,
};

double LearningRate(const TrainConfig &c, int epoch) {
  if (c.lr_decay_every <= 0) return c.learning_rate;
  int drops = (epoch - 1) / c.lr_decay_every;
  return c.learning_rate * std::pow(c.lr_decay_factor, drops);
}

std::vector<std::size_t> EpochOrder(const TrainConfig &c, int epoch, std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(MixSeed(c.seed, kShuffle, static_cast<std::uint64_t>(epoch)));
  rng.Shuffle(order);
  return order;
}

// One online-augmentation draw: a random kind and a uniform SNR from the
// configured range, mixed with noise from the training pool.
Mat64 AugmentedCopy(const TrainConfig &c, const Mat64 &frames, Rng &rng,
                    std::uint64_t noise_index) {
  NoiseKind kind = c.noise_kinds[static_cast<std::size_t>(rng.Below(c.noise_kinds.size()))];
  double snr = rng.Uniform(c.snr_min, c.snr_max);
  std::uint64_t seed = NoiseSeed(NoiseDomain::kTrain, c.seed, noise_index);
  return MixAtSnr(frames, GenNoise(seed, frames.rows(), frames.cols(), kind), snr);
}

void CheckTrainSet(const Dataset &train) {
  if (train.split != Split::kTrain)
    Fail(ErrorKind::kInvalidArgument, "training requires the train split");
  if (train.utterances.empty()) Fail(ErrorKind::kDegenerate, "training set is empty");
  train.Validate();
}

void CheckGrads(const BranchState &grads, long long step) {
  if (!AllFinite(grads)) throw NonFiniteStep(step, "gradient has non-finite entries");
}

// (clean, noisy) pairs for one epoch of stage 2 / joint training.
struct PairEpoch {
  std::vector<Mat64> noisy;
  std::vector<PairInput> pairs;
};

PairEpoch BuildPairs(const TrainConfig &c, const Dataset &train, int epoch,
                     const std::vector<Vec64> *anchor_cache) {
  const auto &utts = train.utterances;
  const std::size_t copies = static_cast<std::size_t>(c.noisy_copies);
  PairEpoch pe;
  pe.noisy.reserve(utts.size() * copies);
  for (std::size_t i = 0; i < utts.size(); ++i) {
    Rng rng(MixSeed(c.seed, kAugment, static_cast<std::uint64_t>(epoch), i));
    for (std::size_t k = 0; k < copies; ++k) {
      std::uint64_t idx = (static_cast<std::uint64_t>(epoch) * utts.size() + i) * copies + k;
      pe.noisy.push_back(AugmentedCopy(c, utts[i].frames, rng, idx));
    }
  }
  auto order = EpochOrder(c, epoch, pe.noisy.size());
  pe.pairs.reserve(order.size());
  for (std::size_t j : order) {
    const std::size_t i = j / copies;
    pe.pairs.push_back({&utts[i].frames, &pe.noisy[j], static_cast<std::size_t>(utts[i].speaker),
                        anchor_cache != nullptr ? &(*anchor_cache)[i] : nullptr});
  }
  return pe;
}

template <typename Fn>
void ForEachBatch(std::size_t n, int batch_size, Fn &&fn) {
  const auto bs = static_cast<std::size_t>(batch_size);
  for (std::size_t start = 0; start < n; start += bs) fn(start, std::min(n, start + bs));
}

}  // namespace

TrainResult TrainStage1(const TrainConfig &c, const Dataset &train) {
  c.Validate();
  if (c.stage != Stage::kStage1) Fail(ErrorKind::kInvalidArgument, "config stage is not 1");
  CheckTrainSet(train);
  const auto &utts = train.utterances;
  TrainResult res;
  res.branch = InitBranch(c.ModelFor(train.dim, static_cast<std::size_t>(train.n_speakers)), c.seed);
  Sgd opt(res.branch, c.momentum);
  BranchState grads = ZerosLike(res.branch);
  long long step = 0;

  for (int epoch = 1; epoch <= c.epochs; ++epoch) {
    const double lr = LearningRate(c, epoch);
    // Each utterance is either kept clean or noise-mixed, redrawn every epoch.
    std::vector<Mat64> inputs;
    inputs.reserve(utts.size());
    for (std::size_t i = 0; i < utts.size(); ++i) {
      Rng rng(MixSeed(c.seed, kAugment, static_cast<std::uint64_t>(epoch), i));
      if (rng.Bernoulli(c.clean_prob))
        inputs.push_back(utts[i].frames);
      else
        inputs.push_back(AugmentedCopy(c, utts[i].frames, rng,
                                       static_cast<std::uint64_t>(epoch) * utts.size() + i));
    }
    auto order = EpochOrder(c, epoch, utts.size());
    double loss_sum = 0.0;
    std::vector<LabeledInput> batch;
    ForEachBatch(order.size(), c.batch_size, [&](std::size_t b, std::size_t e) {
      batch.clear();
      for (std::size_t k = b; k < e; ++k)
        batch.push_back({&inputs[order[k]], static_cast<std::size_t>(utts[order[k]].speaker)});
      grads = ZerosLike(res.branch);
      ++step;
      double loss;
      try {
        loss = Stage1Batch(res.branch, batch, c.head_mode, &grads);
      } catch (const Error &err) {
        if (err.kind() == ErrorKind::kNonFinite) throw NonFiniteStep(step, err.what());
        throw;
      }
      CheckGrads(grads, step);
      opt.Step(&res.branch, grads, lr);
      loss_sum += loss * static_cast<double>(e - b);
    });
    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = loss_sum / static_cast<double>(utts.size());
    rec.ce = rec.loss;
    rec.learning_rate = lr;
    res.log.epochs.push_back(rec);
  }
  res.log.steps = step;
  return res;
}

Stage2Result TrainStage2(const TrainConfig &c, const Dataset &train, const BranchState &base,
                         const StepHook &hook) {
  c.Validate();
  if (c.stage != Stage::kStage2) Fail(ErrorKind::kInvalidArgument, "config stage is not 2");
  CheckTrainSet(train);
  if (base.extractor.input_dim() != train.dim)
    Fail(ErrorKind::kShapeMismatch, "base model input dim does not match the data");
  if (base.head.n_classes() < static_cast<std::size_t>(train.n_speakers))
    Fail(ErrorKind::kShapeMismatch, "base model head has fewer classes than the data");

  Stage2Result res;
  res.anchor = CloneAndFreeze(base);
  res.anchor_digest_at_clone = ParamDigest(res.anchor);
  res.trainable = base;
  res.trainable.frozen = false;
  if (c.stage2_reinit_head) {
    Rng rng(MixSeed(c.seed, 0x68656164ULL));
    res.trainable.head = InitHead(res.trainable.config(), rng);
  }

  // The anchor never changes, so its clean embeddings are computed once.
  std::vector<Vec64> anchor_cache;
  anchor_cache.reserve(train.utterances.size());
  for (const Utterance &u : train.utterances)
    anchor_cache.push_back(ForwardEmbed(res.anchor.extractor, u.frames));

  const Stage2Options opts{c.m, c.head_mode, c.stage2_clean_ce};
  Sgd opt(res.trainable, c.momentum);
  BranchState grads;
  long long step = 0;
  res.log.min_batch_kernel = std::numeric_limits<double>::infinity();

  for (int epoch = 1; epoch <= c.epochs; ++epoch) {
    const double lr = LearningRate(c, epoch);
    PairEpoch pe = BuildPairs(c, train, epoch, &anchor_cache);
    Stage2Terms epoch_sum;
    std::span<const PairInput> all(pe.pairs);
    ForEachBatch(all.size(), c.batch_size, [&](std::size_t b, std::size_t e) {
      grads = ZerosLike(res.trainable);
      ++step;
      Stage2Terms t;
      try {
        t = Stage2Batch(res.anchor, res.trainable, all.subspan(b, e - b), opts, &grads);
      } catch (const Error &err) {
        if (err.kind() == ErrorKind::kNonFinite) throw NonFiniteStep(step, err.what());
        throw;
      }
      CheckGrads(grads, step);
      if (!res.log.first_batch) res.log.first_batch = t;
      res.log.min_batch_kernel =
          std::min(res.log.min_batch_kernel, t.k_clean_noise + t.k_clean_clean);
      opt.Step(&res.trainable, grads, lr);
      if (hook) hook(step);
      Stage2Terms weighted = t;
      weighted *= static_cast<double>(e - b);
      epoch_sum += weighted;
    });
    epoch_sum /= static_cast<double>(all.size());
    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = epoch_sum.total;
    rec.k_clean_noise = epoch_sum.k_clean_noise;
    rec.k_clean_clean = epoch_sum.k_clean_clean;
    rec.ce = epoch_sum.ce_noisy + epoch_sum.ce_clean;
    rec.learning_rate = lr;
    res.log.epochs.push_back(rec);
  }
  res.log.steps = step;
  return res;
}

TrainResult TrainJoint(const TrainConfig &c, const Dataset &train) {
  c.Validate();
  if (c.stage != Stage::kJoint) Fail(ErrorKind::kInvalidArgument, "config stage is not joint");
  CheckTrainSet(train);
  TrainResult res;
  res.branch = InitBranch(c.ModelFor(train.dim, static_cast<std::size_t>(train.n_speakers)), c.seed);
  const JointOptions opts{c.m, c.joint_weight, c.head_mode};
  Sgd opt(res.branch, c.momentum);
  BranchState grads;
  long long step = 0;

  for (int epoch = 1; epoch <= c.epochs; ++epoch) {
    const double lr = LearningRate(c, epoch);
    PairEpoch pe = BuildPairs(c, train, epoch, nullptr);
    JointTerms epoch_sum;
    std::span<const PairInput> all(pe.pairs);
    ForEachBatch(all.size(), c.batch_size, [&](std::size_t b, std::size_t e) {
      grads = ZerosLike(res.branch);
      ++step;
      JointTerms t;
      try {
        t = JointBatch(res.branch, all.subspan(b, e - b), opts, &grads);
      } catch (const Error &err) {
        if (err.kind() == ErrorKind::kNonFinite) throw NonFiniteStep(step, err.what());
        throw;
      }
      CheckGrads(grads, step);
      opt.Step(&res.branch, grads, lr);
      JointTerms weighted = t;
      weighted *= static_cast<double>(e - b);
      epoch_sum += weighted;
    });
    epoch_sum /= static_cast<double>(all.size());
    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = epoch_sum.total;
    rec.k_clean_noise = epoch_sum.kernel;
    rec.ce = epoch_sum.ce_clean + epoch_sum.ce_noisy;
    rec.learning_rate = lr;
    res.log.epochs.push_back(rec);
  }
  res.log.steps = step;
  return res;
}

}  // namespace anchorsv
