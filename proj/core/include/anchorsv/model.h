// core/include/anchorsv/model.h

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

#ifndef ANCHORSV_MODEL_H_
#define ANCHORSV_MODEL_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "anchorsv/math.h"

namespace anchorsv {

class Rng;

/// Frame MLP (D -> H -> H, tanh), statistics pooling (2H), linear
/// projection to the embedding (E), and an S-way speaker head.
struct ModelConfig {
  std::size_t input_dim = 16;
  std::size_t hidden_dim = 32;
  std::size_t embed_dim = 32;
  std::size_t n_classes = 32;
  bool head_bias = false;
  friend bool operator==(const ModelConfig &, const ModelConfig &) = default;
};

/// Variance floor inside the pooled standard deviation.
inline constexpr double kPoolEpsilon = 1e-8;

struct ExtractorParams {
  Mat64 w1;  // H x D
  Vec64 b1;  // H
  Mat64 w2;  // H x H
  Vec64 b2;  // H
  Mat64 wp;  // E x 2H
  Vec64 bp;  // E

  std::size_t input_dim() const { return w1.cols(); }
  std::size_t hidden_dim() const { return w1.rows(); }
  std::size_t embed_dim() const { return wp.rows(); }
  friend bool operator==(const ExtractorParams &, const ExtractorParams &) = default;
};

struct HeadParams {
  Mat64 w;     // S x E, one row per speaker
  Vec64 bias;  // S, or empty when the head has no bias

  std::size_t n_classes() const { return w.rows(); }
  friend bool operator==(const HeadParams &, const HeadParams &) = default;
};

struct BranchState {
  ExtractorParams extractor;
  HeadParams head;
  bool frozen = false;

  ModelConfig config() const;
  friend bool operator==(const BranchState &, const BranchState &) = default;
};

/// Classification logits: plain affine (kSoftmax) or additive angular margin
/// (kAam): logit_j = scale * cos(emb, W_j), with cos(theta + margin) at the
/// true class when a label is supplied.
struct HeadMode {
  enum class Kind { kSoftmax, kAam };
  Kind kind = Kind::kAam;
  double margin = 0.2;
  double scale = 30.0;

  static HeadMode Softmax() { return {Kind::kSoftmax, 0.0, 1.0}; }
  static HeadMode Aam(double margin, double scale) { return {Kind::kAam, margin, scale}; }
  friend bool operator==(const HeadMode &, const HeadMode &) = default;
};

ExtractorParams InitExtractor(const ModelConfig &config, Rng &rng);
HeadParams InitHead(const ModelConfig &config, Rng &rng);
BranchState InitBranch(const ModelConfig &config, std::uint64_t seed);

/// Same shapes as the argument, all zeros, not frozen.
BranchState ZerosLike(const BranchState &branch);
ExtractorParams ZerosLike(const ExtractorParams &params);

/// Intermediate activations kept by ForwardEmbed for the backward pass.
struct EmbedCache {
  Mat64 h1;       // T x H
  Mat64 h2;       // T x H
  Vec64 mean;     // H
  Vec64 stddev;   // H
  Vec64 pooled;   // 2H
};

/// Per-column mean and population standard deviation sqrt(var + kPoolEpsilon)
/// of a T x H activation matrix. Sums run over sorted values, so the result
/// is bitwise invariant to any permutation of the rows.
void PoolStats(const Mat64 &h, Vec64 *mean, Vec64 *stddev);

/// Embedding of a T x D frame matrix (T >= 2). The embedding is not
/// normalized: scaling wp and bp by a scales the output by a.
Vec64 ForwardEmbed(const ExtractorParams &params, const Mat64 &frames,
                   EmbedCache *cache = nullptr);

/// Accumulates dL/dparams into grads given dL/d(embedding).
void BackwardEmbed(const ExtractorParams &params, const Mat64 &frames,
                   const EmbedCache &cache, std::span<const double> grad_embedding,
                   ExtractorParams *grads);

/// label is the training target; with an AAM head the margin is applied only
/// when it is present.
Vec64 ForwardLogits(const HeadParams &head, std::span<const double> embedding,
                    const HeadMode &mode, std::optional<std::size_t> label = {});

/// Backpropagates dL/dlogits through ForwardLogits. grad_head accumulates;
/// grad_embedding (if non-null) is overwritten.
void BackwardLogits(const HeadParams &head, std::span<const double> embedding,
                    const HeadMode &mode, std::optional<std::size_t> label,
                    std::span<const double> grad_logits, HeadParams *grad_head,
                    Vec64 *grad_embedding);

/// Deep copy with frozen = true.
BranchState CloneAndFreeze(const BranchState &branch);

/// Named view of one parameter tensor.
struct ParamBlock {
  std::string name;
  std::vector<std::size_t> shape;
  std::span<double> values;
};
struct ConstParamBlock {
  std::string name;
  std::vector<std::size_t> shape;
  std::span<const double> values;
};

/// Blocks in a fixed order: enc.w1 enc.b1 enc.w2 enc.b2 proj.w proj.b head.w
/// [head.b]. MutableBlocks throws FrozenBranch on a frozen branch; gradient
/// buffers are never frozen.
std::vector<ParamBlock> MutableBlocks(BranchState &branch);
std::vector<ConstParamBlock> Blocks(const BranchState &branch);

std::size_t ParamCount(const BranchState &branch);
Vec64 Flatten(const BranchState &branch);
/// Overwrites parameters from a flat vector (must match ParamCount).
void Unflatten(std::span<const double> flat, BranchState *branch);

/// SHA-256 over block names, shapes and raw bit patterns.
std::string ParamDigest(const BranchState &branch);

bool AllFinite(const BranchState &branch);

}  // namespace anchorsv

#endif  // ANCHORSV_MODEL_H_
