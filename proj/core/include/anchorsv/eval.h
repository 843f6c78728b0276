// core/include/anchorsv/eval.h

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

#ifndef ANCHORSV_EVAL_H_
#define ANCHORSV_EVAL_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "anchorsv/datagen.h"
#include "anchorsv/model.h"

namespace anchorsv {

struct ScoredTrial {
  Trial trial;
  double score = 0.0;
};

/// One embedding per utterance, in dataset order. threads > 1 splits the
/// work; the result is identical to the serial one.
std::vector<Vec64> ExtractEmbeddings(const ExtractorParams &extractor,
                                     const Dataset &dataset, int threads = 1);

std::vector<ScoredTrial> ScoreTrials(const Dataset &dataset,
                                     std::span<const Vec64> embeddings,
                                     std::span<const Trial> trials);
std::vector<ScoredTrial> ScoreTrials(const ExtractorParams &extractor,
                                     const Dataset &dataset,
                                     std::span<const Trial> trials, int threads = 1);

/// Equal error rate in [0, 1]. Thresholds sweep the distinct scores (plus
/// +inf); FAR(t) counts nontargets with score >= t, FRR(t) targets with
/// score < t. At the first threshold where FAR <= FRR the value is returned
/// directly on an exact tie, otherwise linearly interpolated against the
/// previous threshold. Throws Degenerate if either class is empty.
double ComputeEer(std::span<const ScoredTrial> scored);
double ComputeEer(std::span<const double> target_scores,
                  std::span<const double> nontarget_scores);

/// Brute-force reference for ComputeEer: FAR/FRR counted at -inf, at every
/// midpoint between consecutive distinct scores, and at +inf.
double EerOracle(std::span<const ScoredTrial> scored);

struct GeometryStats {
  double inter_var = 0.0;
  double intra_var = 0.0;
  /// inter / intra; +inf when intra is 0 and inter is not, 0 when both are.
  double ratio = 0.0;
  /// Mean squared distance to the global centroid (= inter + intra).
  double total_var = 0.0;
};

/// intra = mean over embeddings of |e - c_spk|^2, inter = count-weighted mean
/// over speakers of |c_s - c|^2. Throws Degenerate with fewer than 2 speakers.
GeometryStats ComputeGeometry(std::span<const Vec64> embeddings,
                              std::span<const int> speakers);

/// Unit-norm copies; scoring is cosine, so this is the geometry the scorer
/// sees.
std::vector<Vec64> LengthNormalized(std::span<const Vec64> embeddings);

struct Projection {
  std::vector<std::array<double, 2>> points;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  /// (lambda1 + lambda2) / trace of the covariance.
  double variance_share = 0.0;
};

/// Centered projection onto the top two principal directions. Each direction
/// is signed so its largest-magnitude coordinate is positive.
Projection Project2d(std::span<const Vec64> embeddings);

struct EvalOptions {
  std::vector<double> snr_grid = DefaultSnrGrid();
  std::vector<NoiseKind> noise_kinds = AllNoiseKinds();
  std::uint64_t seed = 1;
  int threads = 1;
  /// Condition whose embeddings feed the reported noisy geometry. When unset,
  /// the embeddings of every noisy cell are pooled into one noisy test set.
  std::optional<Condition> geometry_condition;
};

struct EvalCell {
  Condition condition;
  double eer = 0.0;
  GeometryStats geometry;
};

struct EvalReport {
  double clean_eer = 0.0;
  GeometryStats clean_geometry;
  std::vector<EvalCell> cells;  // noise kind major, SNR minor
  /// Mean EER over the SNR grid, per noise kind (same order as noise_kinds).
  std::vector<std::pair<NoiseKind, double>> kind_averages;
  double average_noisy_eer = 0.0;
  /// "noisy" for the pooled noisy test set, otherwise the condition name.
  std::string geometry_source;
  GeometryStats noisy_geometry;
  std::size_t n_target = 0;
  std::size_t n_nontarget = 0;

  /// Header "condition,eer,inter,intra,ratio", the clean row first.
  std::string ToCsv() const;
  /// Structured JSON document with every field.
  std::string ToJson() const;
};

/// Noisy copy of every utterance in the dataset, drawn from the evaluation
/// noise pool.
Dataset RemixDataset(const Dataset &dataset, const Condition &condition,
                     std::uint64_t seed);

/// Scores the trial list on the clean test set and on every (kind, snr) remix.
/// Geometry is measured on length-normalized embeddings.
EvalReport FullEval(const ExtractorParams &extractor, const Dataset &test,
                    std::span<const Trial> trials, const EvalOptions &options);

}  // namespace anchorsv

#endif  // ANCHORSV_EVAL_H_
