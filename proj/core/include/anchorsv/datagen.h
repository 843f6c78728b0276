// core/include/anchorsv/datagen.h

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

#ifndef ANCHORSV_DATAGEN_H_
#define ANCHORSV_DATAGEN_H_

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "anchorsv/math.h"

namespace anchorsv {

// Synthetic analogues of the evaluation noise families: kWhite for
// stationary noise, kBabble for speech-like interference built from other
// talkers' prototypes, kTonal for music-like sinusoidal rows.
enum class NoiseKind { kWhite, kBabble, kTonal };

inline constexpr int kBabbleTalkers = 3;
/// Period (in feature dimensions) of every tonal noise row.
inline constexpr std::size_t kTonalPeriod = 4;

std::string_view NoiseKindName(NoiseKind kind);
NoiseKind ParseNoiseKind(std::string_view name);
const std::vector<NoiseKind> &AllNoiseKinds();

/// SNR grid used for evaluation when none is given: 0 to 20 dB in 5 dB steps.
const std::vector<double> &DefaultSnrGrid();

struct Condition {
  bool noisy = false;
  double snr_db = std::numeric_limits<double>::infinity();
  NoiseKind kind = NoiseKind::kWhite;

  static Condition Clean() { return {}; }
  static Condition Noisy(NoiseKind kind, double snr_db) { return {true, snr_db, kind}; }

  /// "clean" or "<kind>@<snr>", e.g. "babble@5".
  std::string ToString() const;
  static Condition Parse(std::string_view text);
  friend bool operator==(const Condition &, const Condition &) = default;
};

struct Utterance {
  std::string id;
  int speaker = 0;
  Mat64 frames;  // T x D
  Condition condition;
};

enum class Split { kTrain, kTest };
std::string_view SplitName(Split split);
Split ParseSplit(std::string_view name);

struct Dataset {
  std::vector<Utterance> utterances;
  int n_speakers = 0;
  Split split = Split::kTrain;
  std::size_t dim = 0;

  /// Index of the utterance with this id; throws UnknownId.
  std::size_t IndexOf(std::string_view id) const;
  /// Throws if labels, ids, dims or frame counts violate the dataset contract.
  void Validate() const;
  std::vector<int> SpeakerSet() const;

 private:
  mutable std::unordered_map<std::string, std::size_t> index_;
};

struct Trial {
  std::string utt_a;
  std::string utt_b;
  bool target = false;
  friend bool operator==(const Trial &, const Trial &) = default;
};

struct CorpusParams {
  std::uint64_t seed = 1;
  int n_speakers = 32;
  int utts_per_speaker = 20;
  int frames = 50;
  int dim = 16;
  /// Norm scale of the per-utterance offset around the speaker prototype.
  double intra_spread = 0.3;
  /// Norm scale of the per-frame jitter.
  double channel_spread = 0.1;
};

/// Speaker s gets a unit-norm prototype p_s; frame t of utterance u is
///   p_s + o_u + j_{u,t},
/// with o_u ~ N(0, intra_spread^2 / D I) and j ~ N(0, channel_spread^2 / D I).
/// Each speaker and utterance draws from its own seed stream, so growing the
/// corpus never changes the speakers already in it.
Dataset SynthCorpus(const CorpusParams &params);

/// Moves the last n_test speakers (by label) into a test split. Labels are
/// kept, so the label sets of the two halves never intersect; the train half
/// reports n_speakers = number of train speakers.
std::pair<Dataset, Dataset> SplitBySpeaker(const Dataset &corpus, int n_test);

/// Zero-mean (over all entries) noise with nonzero power.
Mat64 GenNoise(std::uint64_t seed, std::size_t frames, std::size_t dim,
               NoiseKind kind);

/// sqrt(P_s / (P_n * 10^(snr/10))), where P is the mean squared entry.
double NoiseGain(const Mat64 &signal, const Mat64 &noise, double snr_db);

/// signal + NoiseGain(...) * noise. Throws ZeroPower or ShapeMismatch.
Mat64 MixAtSnr(const Mat64 &signal, const Mat64 &noise, double snr_db);

/// Copy of utt mixed with freshly generated noise of the given kind. An
/// infinite SNR returns the clean frames untouched.
Utterance MakeNoisy(const Utterance &utt, std::uint64_t noise_seed,
                    NoiseKind kind, double snr_db);

/// Samples exactly n_target same-speaker and n_nontarget cross-speaker pairs
/// without replacement. Throws Infeasible when either count exceeds the
/// number of distinct pairs available.
std::vector<Trial> MakeTrials(const Dataset &dataset, std::uint64_t seed,
                              std::size_t n_target, std::size_t n_nontarget);

}  // namespace anchorsv

#endif  // ANCHORSV_DATAGEN_H_
