// core/src/datagen.cc

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

#include "anchorsv/datagen.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <set>
#include <string>

#include "anchorsv/error.h"
#include "anchorsv/rng.h"

namespace anchorsv {

std::string_view NoiseKindName(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kWhite: return "white";
    case NoiseKind::kBabble: return "babble";
    case NoiseKind::kTonal: return "tonal";
  }
  return "?";
}

NoiseKind ParseNoiseKind(std::string_view name) {
  for (NoiseKind k : AllNoiseKinds())
    if (NoiseKindName(k) == name) return k;
  Fail(ErrorKind::kParse, "unknown noise kind '" + std::string(name) + "'");
}

const std::vector<NoiseKind> &AllNoiseKinds() {
  static const std::vector<NoiseKind> kinds = {NoiseKind::kWhite, NoiseKind::kBabble,
                                               NoiseKind::kTonal};
  return kinds;
}

const std::vector<double> &DefaultSnrGrid() {
  static const std::vector<double> grid = {0.0, 5.0, 10.0, 15.0, 20.0};
  return grid;
}

namespace {

std::string FormatSnr(double snr) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, snr);
  return std::string(buf, res.ptr);
}

double ParseNumber(std::string_view text) {
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    if (text == "inf") return std::numeric_limits<double>::infinity();
    Fail(ErrorKind::kParse, "bad number '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

std::string Condition::ToString() const {
  if (!noisy) return "clean";
  return std::string(NoiseKindName(kind)) + "@" + FormatSnr(snr_db);
}

Condition Condition::Parse(std::string_view text) {
  if (text == "clean") return Clean();
  auto at = text.find('@');
  if (at == std::string_view::npos)
    Fail(ErrorKind::kParse, "bad condition '" + std::string(text) + "'");
  return Noisy(ParseNoiseKind(text.substr(0, at)), ParseNumber(text.substr(at + 1)));
}

std::string_view SplitName(Split split) {
  return split == Split::kTrain ? "train" : "test";
}

Split ParseSplit(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "test") return Split::kTest;
  Fail(ErrorKind::kParse, "unknown split '" + std::string(name) + "'");
}

std::size_t Dataset::IndexOf(std::string_view id) const {
  if (index_.size() != utterances.size()) {
    index_.clear();
    for (std::size_t i = 0; i < utterances.size(); ++i) index_.emplace(utterances[i].id, i);
  }
  auto it = index_.find(std::string(id));
  if (it == index_.end()) Fail(ErrorKind::kUnknownId, "no utterance '" + std::string(id) + "'");
  return it->second;
}

void Dataset::Validate() const {
  std::set<std::string> ids;
  for (const Utterance &u : utterances) {
    if (u.speaker < 0 || u.speaker >= n_speakers)
      Fail(ErrorKind::kInvalidArgument, "utterance " + u.id + " has speaker label " +
                                            std::to_string(u.speaker) + " outside [0, " +
                                            std::to_string(n_speakers) + ")");
    if (!ids.insert(u.id).second) Fail(ErrorKind::kInvalidArgument, "duplicate id " + u.id);
    if (u.frames.rows() < 2)
      Fail(ErrorKind::kShapeMismatch, "utterance " + u.id + " has fewer than 2 frames");
    if (u.frames.cols() != dim)
      Fail(ErrorKind::kShapeMismatch, "utterance " + u.id + " has dim " +
                                          std::to_string(u.frames.cols()) + ", dataset dim " +
                                          std::to_string(dim));
    if (!AllFinite(u.frames.flat()))
      Fail(ErrorKind::kNonFinite, "utterance " + u.id + " has non-finite frames");
  }
}

std::vector<int> Dataset::SpeakerSet() const {
  std::set<int> s;
  for (const Utterance &u : utterances) s.insert(u.speaker);
  return {s.begin(), s.end()};
}

namespace {

Vec64 UnitGaussian(Rng &rng, std::size_t dim) {
  Vec64 v(dim);
  for (;;) {
    for (double &x : v) x = rng.Gaussian();
    double n = Norm(v);
    if (n > 1e-6) {
      for (double &x : v) x /= n;
      return v;
    }
  }
}

void SubtractMean(Mat64 &m) {
  double mean = 0.0;
  for (double v : m.flat()) mean += v;
  mean /= static_cast<double>(m.size());
  for (double &v : m.flat()) v -= mean;
}

}  // namespace

Dataset SynthCorpus(const CorpusParams &p) {
  if (p.n_speakers < 1 || p.utts_per_speaker < 1 || p.frames < 1 || p.dim < 1)
    Fail(ErrorKind::kInvalidArgument, "corpus counts must be >= 1");
  if (p.intra_spread < 0 || p.channel_spread < 0)
    Fail(ErrorKind::kInvalidArgument, "corpus spreads must be >= 0");
  const auto dim = static_cast<std::size_t>(p.dim);
  const auto frames = static_cast<std::size_t>(p.frames);
  const double offset_sd = p.intra_spread / std::sqrt(static_cast<double>(dim));
  const double jitter_sd = p.channel_spread / std::sqrt(static_cast<double>(dim));

  Dataset ds;
  ds.n_speakers = p.n_speakers;
  ds.split = Split::kTrain;
  ds.dim = dim;
  ds.utterances.reserve(static_cast<std::size_t>(p.n_speakers) * p.utts_per_speaker);
  for (int s = 0; s < p.n_speakers; ++s) {
    Rng proto_rng(MixSeed(p.seed, 1, static_cast<std::uint64_t>(s)));
    const Vec64 proto = UnitGaussian(proto_rng, dim);
    for (int u = 0; u < p.utts_per_speaker; ++u) {
      Rng rng(MixSeed(p.seed, 2, static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(u)));
      Vec64 offset(dim);
      for (double &x : offset) x = offset_sd * rng.Gaussian();
      Utterance utt;
      char id[32];
      std::snprintf(id, sizeof id, "spk%03d-utt%03d", s, u);
      utt.id = id;
      utt.speaker = s;
      utt.frames = Mat64(frames, dim);
      for (std::size_t t = 0; t < frames; ++t)
        for (std::size_t d = 0; d < dim; ++d)
          utt.frames(t, d) = proto[d] + offset[d] + jitter_sd * rng.Gaussian();
      ds.utterances.push_back(std::move(utt));
    }
  }
  return ds;
}

std::pair<Dataset, Dataset> SplitBySpeaker(const Dataset &corpus, int n_test) {
  if (n_test < 1 || n_test >= corpus.n_speakers)
    Fail(ErrorKind::kInvalidArgument, "test speaker count must be in [1, n_speakers)");
  const int first_test = corpus.n_speakers - n_test;
  Dataset train, test;
  train.n_speakers = first_test;
  train.split = Split::kTrain;
  test.n_speakers = corpus.n_speakers;
  test.split = Split::kTest;
  train.dim = test.dim = corpus.dim;
  for (const Utterance &u : corpus.utterances)
    (u.speaker < first_test ? train : test).utterances.push_back(u);
  return {std::move(train), std::move(test)};
}

Mat64 GenNoise(std::uint64_t seed, std::size_t frames, std::size_t dim, NoiseKind kind) {
  if (frames < 1 || dim < 1) Fail(ErrorKind::kInvalidArgument, "noise shape must be >= 1x1");
  Rng rng(seed);
  Mat64 n(frames, dim);
  switch (kind) {
    case NoiseKind::kWhite:
      for (double &v : n.flat()) v = rng.Gaussian();
      break;
    case NoiseKind::kBabble: {
      // Other talkers: prototypes drawn like speaker prototypes, each with a
      // per-frame level so the interference moves over time.
      std::vector<Vec64> talkers;
      for (int k = 0; k < kBabbleTalkers; ++k) talkers.push_back(UnitGaussian(rng, dim));
      const double jitter_sd = 0.1 / std::sqrt(static_cast<double>(dim));
      for (std::size_t t = 0; t < frames; ++t) {
        for (const Vec64 &q : talkers) {
          double level = std::abs(1.0 + 0.5 * rng.Gaussian()) / kBabbleTalkers;
          for (std::size_t d = 0; d < dim; ++d) n(t, d) += level * q[d];
        }
        for (std::size_t d = 0; d < dim; ++d) n(t, d) += jitter_sd * rng.Gaussian();
      }
      SubtractMean(n);
      break;
    }
    case NoiseKind::kTonal: {
      const double w = 2.0 * std::numbers::pi / static_cast<double>(kTonalPeriod);
      // A sustained tone: one phase for the whole utterance, with a per-frame
      // amplitude envelope.
      const double phase = rng.Uniform(0.0, 2.0 * std::numbers::pi);
      for (std::size_t t = 0; t < frames; ++t) {
        double amp = rng.Uniform(0.5, 1.5);
        for (std::size_t d = 0; d < dim; ++d)
          n(t, d) = amp * std::sin(w * static_cast<double>(d) + phase);
      }
      SubtractMean(n);
      break;
    }
  }
  return n;
}

double NoiseGain(const Mat64 &signal, const Mat64 &noise, double snr_db) {
  if (!signal.SameShape(noise))
    Fail(ErrorKind::kShapeMismatch, "signal and noise shapes differ");
  const double ps = MeanSquare(signal.flat());
  const double pn = MeanSquare(noise.flat());
  if (!(ps > 0.0)) Fail(ErrorKind::kZeroPower, "signal power is zero");
  if (!(pn > 0.0)) Fail(ErrorKind::kZeroPower, "noise power is zero");
  return std::sqrt(ps / (pn * std::pow(10.0, snr_db / 10.0)));
}

Mat64 MixAtSnr(const Mat64 &signal, const Mat64 &noise, double snr_db) {
  const double g = NoiseGain(signal, noise, snr_db);
  Mat64 out = signal;
  auto o = out.flat();
  auto nz = noise.flat();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += g * nz[i];
  return out;
}

Utterance MakeNoisy(const Utterance &utt, std::uint64_t noise_seed, NoiseKind kind,
                    double snr_db) {
  Utterance out = utt;
  if (std::isinf(snr_db) && snr_db > 0) return out;
  Mat64 noise = GenNoise(noise_seed, utt.frames.rows(), utt.frames.cols(), kind);
  out.frames = MixAtSnr(utt.frames, noise, snr_db);
  out.condition = Condition::Noisy(kind, snr_db);
  return out;
}

std::vector<Trial> MakeTrials(const Dataset &dataset, std::uint64_t seed,
                              std::size_t n_target, std::size_t n_nontarget) {
  const auto &utts = dataset.utterances;
  if (dataset.SpeakerSet().size() < 2)
    Fail(ErrorKind::kInfeasible, "trial generation needs at least 2 speakers");
  using Pair = std::pair<std::size_t, std::size_t>;
  std::vector<Pair> targets, nontargets;
  for (std::size_t i = 0; i < utts.size(); ++i)
    for (std::size_t j = i + 1; j < utts.size(); ++j)
      (utts[i].speaker == utts[j].speaker ? targets : nontargets).emplace_back(i, j);
  if (n_target > targets.size())
    Fail(ErrorKind::kInfeasible, "requested " + std::to_string(n_target) +
                                     " target trials, only " +
                                     std::to_string(targets.size()) + " distinct pairs");
  if (n_nontarget > nontargets.size())
    Fail(ErrorKind::kInfeasible, "requested " + std::to_string(n_nontarget) +
                                     " nontarget trials, only " +
                                     std::to_string(nontargets.size()) + " distinct pairs");
  Rng rng(MixSeed(seed, 3));
  auto take = [&rng](std::vector<Pair> &pool, std::size_t n) {
    // Partial Fisher-Yates: the first n slots become a uniform sample.
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t j = i + static_cast<std::size_t>(rng.Below(pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(n);
  };
  take(targets, n_target);
  take(nontargets, n_nontarget);

  std::vector<Trial> trials;
  trials.reserve(n_target + n_nontarget);
  for (auto [i, j] : targets) trials.push_back({utts[i].id, utts[j].id, true});
  for (auto [i, j] : nontargets) trials.push_back({utts[i].id, utts[j].id, false});
  rng.Shuffle(trials);
  return trials;
}

}  // namespace anchorsv
