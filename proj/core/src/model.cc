// core/src/model.cc

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

#include "anchorsv/model.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "anchorsv/digest.h"
#include "anchorsv/error.h"
#include "anchorsv/rng.h"

namespace anchorsv {

ModelConfig BranchState::config() const {
  ModelConfig c;
  c.input_dim = extractor.input_dim();
  c.hidden_dim = extractor.hidden_dim();
  c.embed_dim = extractor.embed_dim();
  c.n_classes = head.n_classes();
  c.head_bias = !head.bias.empty();
  return c;
}

namespace {

void FillGaussian(Mat64 &m, Rng &rng, double sd) {
  for (double &v : m.flat()) v = sd * rng.Gaussian();
}

double InvSqrt(std::size_t n) { return 1.0 / std::sqrt(static_cast<double>(n)); }

// Sum of values in ascending order. Used for the pooled statistics so that
// the result depends only on the multiset of frames, not their order.
double SortedSum(std::vector<double> &scratch) {
  std::sort(scratch.begin(), scratch.end());
  double s = 0.0;
  for (double v : scratch) s += v;
  return s;
}

}  // namespace

ExtractorParams InitExtractor(const ModelConfig &c, Rng &rng) {
  if (c.input_dim == 0 || c.hidden_dim == 0 || c.embed_dim == 0)
    Fail(ErrorKind::kInvalidArgument, "model dimensions must be >= 1");
  ExtractorParams p;
  p.w1 = Mat64(c.hidden_dim, c.input_dim);
  p.b1.assign(c.hidden_dim, 0.0);
  p.w2 = Mat64(c.hidden_dim, c.hidden_dim);
  p.b2.assign(c.hidden_dim, 0.0);
  p.wp = Mat64(c.embed_dim, 2 * c.hidden_dim);
  p.bp.assign(c.embed_dim, 0.0);
  // Inputs are unit-norm-scale vectors, so entries are ~1/sqrt(D); the extra
  // sqrt(D) keeps first-layer pre-activations O(1).
  FillGaussian(p.w1, rng, 1.0);
  FillGaussian(p.w2, rng, InvSqrt(c.hidden_dim));
  FillGaussian(p.wp, rng, InvSqrt(2 * c.hidden_dim));
  return p;
}

HeadParams InitHead(const ModelConfig &c, Rng &rng) {
  if (c.n_classes == 0) Fail(ErrorKind::kInvalidArgument, "head needs >= 1 class");
  HeadParams h;
  h.w = Mat64(c.n_classes, c.embed_dim);
  FillGaussian(h.w, rng, InvSqrt(c.embed_dim));
  if (c.head_bias) h.bias.assign(c.n_classes, 0.0);
  return h;
}

BranchState InitBranch(const ModelConfig &config, std::uint64_t seed) {
  Rng rng(MixSeed(seed, 0x696e6974ULL));
  BranchState b;
  b.extractor = InitExtractor(config, rng);
  b.head = InitHead(config, rng);
  return b;
}

ExtractorParams ZerosLike(const ExtractorParams &p) {
  ExtractorParams z;
  z.w1 = Mat64(p.w1.rows(), p.w1.cols());
  z.b1.assign(p.b1.size(), 0.0);
  z.w2 = Mat64(p.w2.rows(), p.w2.cols());
  z.b2.assign(p.b2.size(), 0.0);
  z.wp = Mat64(p.wp.rows(), p.wp.cols());
  z.bp.assign(p.bp.size(), 0.0);
  return z;
}

BranchState ZerosLike(const BranchState &b) {
  BranchState z;
  z.extractor = ZerosLike(b.extractor);
  z.head.w = Mat64(b.head.w.rows(), b.head.w.cols());
  z.head.bias.assign(b.head.bias.size(), 0.0);
  return z;
}

void PoolStats(const Mat64 &h, Vec64 *mean, Vec64 *stddev) {
  const std::size_t T = h.rows(), H = h.cols();
  if (T == 0) Fail(ErrorKind::kShapeMismatch, "pooling over zero frames");
  const double inv_t = 1.0 / static_cast<double>(T);
  mean->assign(H, 0.0);
  stddev->assign(H, 0.0);
  std::vector<double> col(T);
  for (std::size_t i = 0; i < H; ++i) {
    for (std::size_t t = 0; t < T; ++t) col[t] = h(t, i);
    const double mu = SortedSum(col) * inv_t;
    for (std::size_t t = 0; t < T; ++t) {
      const double d = h(t, i) - mu;
      col[t] = d * d;
    }
    (*mean)[i] = mu;
    (*stddev)[i] = std::sqrt(SortedSum(col) * inv_t + kPoolEpsilon);
  }
}

Vec64 ForwardEmbed(const ExtractorParams &p, const Mat64 &x, EmbedCache *cache) {
  const std::size_t T = x.rows(), D = p.input_dim(), H = p.hidden_dim(),
                    E = p.embed_dim();
  if (x.cols() != D)
    Fail(ErrorKind::kShapeMismatch, "frames have dim " + std::to_string(x.cols()) +
                                        ", extractor expects " + std::to_string(D));
  if (T < 2) Fail(ErrorKind::kShapeMismatch, "statistics pooling needs >= 2 frames");

  EmbedCache local;
  EmbedCache &c = cache != nullptr ? *cache : local;
  c.h1 = Mat64(T, H);
  c.h2 = Mat64(T, H);
  for (std::size_t t = 0; t < T; ++t) {
    auto xt = x.row(t);
    auto h1 = c.h1.row(t);
    for (std::size_t i = 0; i < H; ++i) h1[i] = std::tanh(p.b1[i] + Dot(p.w1.row(i), xt));
    auto h2 = c.h2.row(t);
    for (std::size_t i = 0; i < H; ++i) h2[i] = std::tanh(p.b2[i] + Dot(p.w2.row(i), h1));
  }

  PoolStats(c.h2, &c.mean, &c.stddev);
  c.pooled.resize(2 * H);
  std::copy(c.mean.begin(), c.mean.end(), c.pooled.begin());
  std::copy(c.stddev.begin(), c.stddev.end(), c.pooled.begin() + static_cast<std::ptrdiff_t>(H));

  Vec64 emb(E);
  for (std::size_t k = 0; k < E; ++k) emb[k] = p.bp[k] + Dot(p.wp.row(k), c.pooled);
  return emb;
}

void BackwardEmbed(const ExtractorParams &p, const Mat64 &x, const EmbedCache &c,
                   std::span<const double> g_emb, ExtractorParams *g) {
  const std::size_t T = x.rows(), D = p.input_dim(), H = p.hidden_dim(),
                    E = p.embed_dim();
  if (g_emb.size() != E) Fail(ErrorKind::kShapeMismatch, "embedding gradient length");

  Vec64 g_pool(2 * H, 0.0);
  for (std::size_t k = 0; k < E; ++k) {
    const double gk = g_emb[k];
    if (gk == 0.0) continue;
    g->bp[k] += gk;
    auto gw = g->wp.row(k);
    auto w = p.wp.row(k);
    for (std::size_t j = 0; j < 2 * H; ++j) {
      gw[j] += gk * c.pooled[j];
      g_pool[j] += gk * w[j];
    }
  }

  const double inv_t = 1.0 / static_cast<double>(T);
  Vec64 g_a2(H), g_h1(H), g_a1(H);
  for (std::size_t t = 0; t < T; ++t) {
    auto h1 = c.h1.row(t);
    auto h2 = c.h2.row(t);
    // d mean / d h = 1/T; d std / d h = (h - mean) / (T std).
    for (std::size_t i = 0; i < H; ++i) {
      double g_h2 = g_pool[i] * inv_t +
                    g_pool[H + i] * (h2[i] - c.mean[i]) * inv_t / c.stddev[i];
      g_a2[i] = g_h2 * (1.0 - h2[i] * h2[i]);
    }
    std::fill(g_h1.begin(), g_h1.end(), 0.0);
    for (std::size_t i = 0; i < H; ++i) {
      const double ga = g_a2[i];
      g->b2[i] += ga;
      auto gw = g->w2.row(i);
      auto w = p.w2.row(i);
      for (std::size_t j = 0; j < H; ++j) {
        gw[j] += ga * h1[j];
        g_h1[j] += ga * w[j];
      }
    }
    auto xt = x.row(t);
    for (std::size_t i = 0; i < H; ++i) {
      const double ga = g_h1[i] * (1.0 - h1[i] * h1[i]);
      g->b1[i] += ga;
      auto gw = g->w1.row(i);
      for (std::size_t d = 0; d < D; ++d) gw[d] += ga * xt[d];
    }
  }
}

namespace {

// cos(theta + margin) as a function of c = cos(theta), and its derivative.
double MarginCos(double c, double margin, double *deriv) {
  const double s2 = std::max(0.0, 1.0 - c * c);
  const double sin_t = std::sqrt(s2);
  if (deriv != nullptr)
    *deriv = std::cos(margin) + std::sin(margin) * c / std::max(sin_t, 1e-7);
  return c * std::cos(margin) - sin_t * std::sin(margin);
}

void CheckHead(const HeadParams &head, std::span<const double> emb) {
  if (emb.size() != head.w.cols())
    Fail(ErrorKind::kShapeMismatch, "embedding length " + std::to_string(emb.size()) +
                                        " does not match head width " +
                                        std::to_string(head.w.cols()));
}

}  // namespace

Vec64 ForwardLogits(const HeadParams &head, std::span<const double> emb,
                    const HeadMode &mode, std::optional<std::size_t> label) {
  CheckHead(head, emb);
  const std::size_t S = head.n_classes();
  Vec64 logits(S);
  if (mode.kind == HeadMode::Kind::kSoftmax) {
    for (std::size_t j = 0; j < S; ++j)
      logits[j] = Dot(head.w.row(j), emb) + (head.bias.empty() ? 0.0 : head.bias[j]);
    return logits;
  }
  if (!(Norm(emb) > kNormEpsilon))
    Fail(ErrorKind::kZeroVector, "AAM logits of a zero embedding");
  for (std::size_t j = 0; j < S; ++j) {
    double c = Cosine(emb, head.w.row(j));
    if (label && *label == j) c = MarginCos(c, mode.margin, nullptr);
    logits[j] = mode.scale * c;
  }
  return logits;
}

void BackwardLogits(const HeadParams &head, std::span<const double> emb,
                    const HeadMode &mode, std::optional<std::size_t> label,
                    std::span<const double> g_logits, HeadParams *g_head,
                    Vec64 *g_emb) {
  CheckHead(head, emb);
  const std::size_t S = head.n_classes(), E = emb.size();
  Vec64 ge(E, 0.0);
  if (mode.kind == HeadMode::Kind::kSoftmax) {
    for (std::size_t j = 0; j < S; ++j) {
      const double gl = g_logits[j];
      auto w = head.w.row(j);
      if (g_head != nullptr) {
        auto gw = g_head->w.row(j);
        for (std::size_t k = 0; k < E; ++k) gw[k] += gl * emb[k];
        if (!head.bias.empty()) g_head->bias[j] += gl;
      }
      for (std::size_t k = 0; k < E; ++k) ge[k] += gl * w[k];
    }
  } else {
    Vec64 dc_de, dc_dw;
    for (std::size_t j = 0; j < S; ++j) {
      double c = CosineWithGrad(emb, head.w.row(j), &dc_de, &dc_dw);
      double dl_dc = mode.scale;
      if (label && *label == j) {
        double deriv = 0.0;
        MarginCos(c, mode.margin, &deriv);
        dl_dc *= deriv;
      }
      const double gc = g_logits[j] * dl_dc;
      if (g_head != nullptr) {
        auto gw = g_head->w.row(j);
        for (std::size_t k = 0; k < E; ++k) gw[k] += gc * dc_dw[k];
      }
      for (std::size_t k = 0; k < E; ++k) ge[k] += gc * dc_de[k];
    }
  }
  if (g_emb != nullptr) *g_emb = std::move(ge);
}

BranchState CloneAndFreeze(const BranchState &branch) {
  if (!AllFinite(branch)) Fail(ErrorKind::kNonFinite, "cannot freeze a non-finite branch");
  BranchState copy = branch;
  copy.frozen = true;
  return copy;
}

namespace {

template <typename Block, typename Branch>
std::vector<Block> BlocksOf(Branch &b) {
  std::vector<Block> out;
  auto mat = [&out](const char *name, auto &m) {
    out.push_back({name, {m.rows(), m.cols()}, m.flat()});
  };
  auto vec = [&out](const char *name, auto &v) {
    out.push_back({name, {v.size()}, {v.data(), v.size()}});
  };
  mat("enc.w1", b.extractor.w1);
  vec("enc.b1", b.extractor.b1);
  mat("enc.w2", b.extractor.w2);
  vec("enc.b2", b.extractor.b2);
  mat("proj.w", b.extractor.wp);
  vec("proj.b", b.extractor.bp);
  mat("head.w", b.head.w);
  if (!b.head.bias.empty()) vec("head.b", b.head.bias);
  return out;
}

}  // namespace

std::vector<ParamBlock> MutableBlocks(BranchState &branch) {
  if (branch.frozen) Fail(ErrorKind::kFrozenBranch, "attempt to mutate a frozen branch");
  return BlocksOf<ParamBlock>(branch);
}

std::vector<ConstParamBlock> Blocks(const BranchState &branch) {
  return BlocksOf<ConstParamBlock>(branch);
}

std::size_t ParamCount(const BranchState &branch) {
  std::size_t n = 0;
  for (const auto &b : Blocks(branch)) n += b.values.size();
  return n;
}

Vec64 Flatten(const BranchState &branch) {
  Vec64 flat;
  flat.reserve(ParamCount(branch));
  for (const auto &b : Blocks(branch)) flat.insert(flat.end(), b.values.begin(), b.values.end());
  return flat;
}

void Unflatten(std::span<const double> flat, BranchState *branch) {
  if (flat.size() != ParamCount(*branch))
    Fail(ErrorKind::kShapeMismatch, "flat parameter vector has wrong length");
  std::size_t off = 0;
  for (auto &b : MutableBlocks(*branch)) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(off), b.values.size(), b.values.begin());
    off += b.values.size();
  }
}

std::string ParamDigest(const BranchState &branch) {
  Sha256 h;
  for (const auto &b : Blocks(branch)) {
    std::string head = b.name;
    for (std::size_t d : b.shape) head += " " + std::to_string(d);
    head += "\n";
    h.Update(head);
    h.Update(b.values);
  }
  return h.Hex();
}

bool AllFinite(const BranchState &branch) {
  for (const auto &b : Blocks(branch))
    if (!AllFinite(b.values)) return false;
  return true;
}

}  // namespace anchorsv
