// tests/acceptance.cc

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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 only
// when every criterion passes. Tolerances and seed counts are fixed here.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "anchorsv/config.h"
#include "anchorsv/datagen.h"
#include "anchorsv/digest.h"
#include "anchorsv/eval.h"
#include "anchorsv/losses.h"
#include "anchorsv/model.h"
#include "anchorsv/rng.h"
#include "anchorsv/trainer.h"

#ifdef ANCHORSV_HAVE_CLI
#include "cli.h"
#endif

namespace anchorsv {
namespace {

constexpr double kGradTol = 1e-4;
constexpr int kGradSeeds = 20;
constexpr double kGradBudgetSeconds = 60.0;
constexpr std::size_t kGradFrames = 6;
constexpr double kFreezeBudgetSeconds = 120.0;
constexpr double kSnrTolDb = 1e-9;
constexpr double kEerTol = 1e-9;
constexpr int kEerInstances = 100;
constexpr std::size_t kEerMaxTrials = 10000;
constexpr int kBenchmarkSeeds = 5;
constexpr int kRequiredSeeds = 4;
constexpr double kCleanEerSlack = 1.25;
constexpr double kBenchmarkBudgetSeconds = 15.0 * 60.0;
constexpr double kDecompTol = 1e-9;
constexpr double kAamTol = 1e-12;

// Reference desk benchmark: 32 training speakers, 16 held-out test speakers,
// 20 utterances of 50 frames in 16 dims, 3000 target / 6000 nontarget trials.
constexpr int kTrainSpeakers = 32;
constexpr int kTestSpeakers = 16;
constexpr std::size_t kTargets = 3000;
constexpr std::size_t kNontargets = 6000;

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

int g_failures = 0;

void Report(int id, const std::string &name, bool pass, const std::string &detail) {
  std::printf("%s [%d] %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string Fmt(const char *fmt, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, fmt, a);
  return buf;
}

Mat64 RandomFrames(Rng &rng, std::size_t t, std::size_t d) {
  Mat64 m(t, d);
  for (double &x : m.flat()) x = rng.Gaussian();
  return m;
}

// ---------------------------------------------------------------------------
// 1. Gradient correctness at desk dimensions.

void CriterionGradients() {
  const auto start = Clock::now();
  const ModelConfig config;  // 16 -> 32 -> 32, 32 classes
  double worst[4] = {0, 0, 0, 0};
  const char *names[4] = {"softmax", "aam", "stage2", "joint"};
  for (int seed = 0; seed < kGradSeeds; ++seed) {
    Rng rng(MixSeed(2024, static_cast<std::uint64_t>(seed)));
    ModelConfig biased = config;
    biased.head_bias = true;
    BranchState soft = InitBranch(biased, static_cast<std::uint64_t>(seed));
    BranchState model = InitBranch(config, static_cast<std::uint64_t>(seed) + 100);
    BranchState anchor = CloneAndFreeze(InitBranch(config, static_cast<std::uint64_t>(seed) + 200));
    for (double &b : soft.head.bias) b = 0.1 * rng.Gaussian();
    for (double &b : model.extractor.bp) b = 0.1 * rng.Gaussian();

    std::vector<Mat64> clean, noisy;
    for (int i = 0; i < 2; ++i) {
      clean.push_back(RandomFrames(rng, kGradFrames, config.input_dim));
      Mat64 n = clean.back();
      for (double &x : n.flat()) x += 0.5 * rng.Gaussian();
      noisy.push_back(n);
    }
    std::vector<LabeledInput> labeled;
    std::vector<PairInput> pairs, anchored;
    std::vector<Vec64> anchor_clean;
    for (const Mat64 &x : clean) anchor_clean.push_back(ForwardEmbed(anchor.extractor, x));
    for (int i = 0; i < 2; ++i) {
      const auto label = static_cast<std::size_t>(rng.Below(config.n_classes));
      labeled.push_back({&clean[i], label});
      pairs.push_back({&clean[i], &noisy[i], label, nullptr});
      anchored.push_back({&clean[i], &noisy[i], label, &anchor_clean[i]});
    }

    // Central differences with each coordinate perturbed in place; same
    // probe step and relative error as GradCheck.
    auto check = [](BranchState at,
                    const std::function<double(const BranchState &, BranchState *)> &loss) {
      BranchState grads = ZerosLike(at);
      loss(at, &grads);
      const Vec64 analytic = Flatten(grads);
      std::vector<double *> coords;
      for (auto &block : MutableBlocks(at))
        for (double &v : block.values) coords.push_back(&v);
      constexpr double h = 1e-5;
      double worst = 0.0;
      for (std::size_t i = 0; i < coords.size(); ++i) {
        const double orig = *coords[i];
        *coords[i] = orig + h;
        const double fp = loss(at, nullptr);
        *coords[i] = orig - h;
        const double fm = loss(at, nullptr);
        *coords[i] = orig;
        const double fd = (fp - fm) / (2.0 * h);
        const double denom = std::max({1.0, std::abs(analytic[i]), std::abs(fd)});
        worst = std::max(worst, std::abs(analytic[i] - fd) / denom);
      }
      return worst;
    };
    const HeadMode aam = HeadMode::Aam(0.2, 30.0);
    worst[0] = std::max(worst[0], check(soft, [&](const BranchState &b, BranchState *g) {
      return Stage1Batch(b, labeled, HeadMode::Softmax(), g);
    }));
    worst[1] = std::max(worst[1], check(model, [&](const BranchState &b, BranchState *g) {
      return Stage1Batch(b, labeled, aam, g);
    }));
    const Stage2Options s2{5.0, aam, false};
    worst[2] = std::max(worst[2], check(model, [&](const BranchState &b, BranchState *g) {
      return Stage2Batch(anchor, b, anchored, s2, g).total;
    }));
    const JointOptions jo{5.0, 1.0, aam};
    worst[3] = std::max(worst[3], check(model, [&](const BranchState &b, BranchState *g) {
      return JointBatch(b, pairs, jo, g).total;
    }));
  }
  const double elapsed = Seconds(start);
  bool pass = elapsed < kGradBudgetSeconds;
  std::ostringstream detail;
  for (int k = 0; k < 4; ++k) {
    pass = pass && worst[k] < kGradTol;
    detail << names[k] << " max rel err " << Fmt("%.2e", worst[k]) << ", ";
  }
  detail << kGradSeeds << " seeds, " << Fmt("%.1f", elapsed) << " s";
  Report(1, "gradient correctness", pass, detail.str());
}

// ---------------------------------------------------------------------------
// Reference benchmark, shared by criteria 2, 5, 6 and 7.

struct SeedRun {
  std::uint64_t seed = 0;
  EvalReport stage1, stage2, joint;
  std::string anchor_digest_at_clone, anchor_digest_after, base_digest;
  std::optional<Stage2Terms> first_batch;
  double min_batch_kernel = 0.0;
  double stage2_seconds = 0.0;
};

SeedRun RunSeed(std::uint64_t seed) {
  SeedRun run;
  run.seed = seed;
  CorpusParams p;
  p.seed = seed;
  p.n_speakers = kTrainSpeakers + kTestSpeakers;
  auto [train, test] = SplitBySpeaker(SynthCorpus(p), kTestSpeakers);
  const auto trials = MakeTrials(test, seed, kTargets, kNontargets);

  TrainConfig config;
  config.seed = seed;
  TrainResult s1 = TrainStage1(config, train);
  run.base_digest = ParamDigest(s1.branch);

  config.stage = Stage::kStage2;
  const auto t2 = Clock::now();
  Stage2Result s2 = TrainStage2(config, train, s1.branch);
  run.stage2_seconds = Seconds(t2);
  run.anchor_digest_at_clone = s2.anchor_digest_at_clone;
  run.anchor_digest_after = ParamDigest(s2.anchor);
  run.first_batch = s2.log.first_batch;
  run.min_batch_kernel = s2.log.min_batch_kernel;

  config.stage = Stage::kJoint;
  TrainResult joint = TrainJoint(config, train);

  EvalOptions eo;
  eo.seed = seed;
  run.stage1 = FullEval(s1.branch.extractor, test, trials, eo);
  run.stage2 = FullEval(s2.trainable.extractor, test, trials, eo);
  run.joint = FullEval(joint.branch.extractor, test, trials, eo);
  std::printf("  seed %llu: noisy EER s1 %.4f s2 %.4f joint %.4f | clean EER s1 %.4f s2 %.4f "
              "joint %.4f | noisy intra s1 %.4f s2 %.4f | ratio s2 %.3f joint %.3f\n",
              static_cast<unsigned long long>(seed), run.stage1.average_noisy_eer,
              run.stage2.average_noisy_eer, run.joint.average_noisy_eer, run.stage1.clean_eer,
              run.stage2.clean_eer, run.joint.clean_eer, run.stage1.noisy_geometry.intra_var,
              run.stage2.noisy_geometry.intra_var, run.stage2.noisy_geometry.ratio,
              run.joint.noisy_geometry.ratio);
  std::fflush(stdout);
  return run;
}

void CriterionFreeze(const SeedRun &run) {
  const bool same = run.anchor_digest_after == run.anchor_digest_at_clone &&
                    run.anchor_digest_at_clone == run.base_digest;
  const bool pass = same && run.stage2_seconds < kFreezeBudgetSeconds;
  Report(2, "freeze guarantee", pass,
         "anchor digest " + run.anchor_digest_after.substr(0, 16) +
             (same ? " equals" : " differs from") + " post-clone snapshot after 30 epochs, " +
             Fmt("%.1f s", run.stage2_seconds));
}

// ---------------------------------------------------------------------------
// 3. SNR exactness.

void CriterionSnr() {
  Rng rng(303);
  double worst = 0.0;
  int cases = 0;
  for (int k = 0; k < 60; ++k) {
    const double ps = std::exp(rng.Uniform(-6.0, 6.0));
    const double pn = std::exp(rng.Uniform(-6.0, 6.0));
    const NoiseKind kind = AllNoiseKinds()[static_cast<std::size_t>(k) % 3];
    Mat64 s = RandomFrames(rng, 50, 16);
    Mat64 n = GenNoise(rng.NextU64(), 50, 16, kind);
    const double s_scale = std::sqrt(ps / MeanSquare(s.flat()));
    const double n_scale = std::sqrt(pn / MeanSquare(n.flat()));
    for (double &x : s.flat()) x *= s_scale;
    for (double &x : n.flat()) x *= n_scale;
    for (double snr : DefaultSnrGrid()) {
      Mat64 mixed = MixAtSnr(s, n, snr);
      Mat64 noise_part = mixed;
      for (std::size_t i = 0; i < mixed.size(); ++i) noise_part.flat()[i] -= s.flat()[i];
      const double g = NoiseGain(s, n, snr);
      Mat64 scaled = n;
      for (double &x : scaled.flat()) x *= g;
      const double direct = 10.0 * std::log10(MeanSquare(s.flat()) / MeanSquare(scaled.flat()));
      const double from_mix =
          10.0 * std::log10(MeanSquare(s.flat()) / MeanSquare(noise_part.flat()));
      worst = std::max({worst, std::abs(direct - snr), std::abs(from_mix - snr)});
      ++cases;
    }
  }
  Report(3, "SNR exactness", worst < kSnrTolDb,
         std::to_string(cases) + " (P_s, P_n, snr) cases, max |error| " + Fmt("%.2e dB", worst));
}

// ---------------------------------------------------------------------------
// 4. EER oracle equivalence and transform invariance.

void CriterionEer() {
  Rng rng(404);
  double worst_oracle = 0.0, worst_transform = 0.0;
  std::size_t largest = 0;
  for (int k = 0; k < kEerInstances; ++k) {
    const std::size_t n = k == 0 ? kEerMaxTrials : 2 + rng.Below(kEerMaxTrials - 1);
    largest = std::max(largest, n);
    const double shift = rng.Uniform(0.0, 3.0);
    const bool ties = rng.Bernoulli(0.3);
    std::vector<ScoredTrial> scored;
    for (std::size_t i = 0; i < n; ++i) {
      const bool target = i == 0 || (i != 1 && rng.Bernoulli(0.3));
      double s = rng.Gaussian() + (target ? shift : 0.0);
      if (ties) s = std::round(8.0 * s) / 8.0;
      scored.push_back({{"a", "b", target}, s});
    }
    const double eer = ComputeEer(scored);
    worst_oracle = std::max(worst_oracle, std::abs(eer - EerOracle(scored)));
    auto exp_scores = scored, affine = scored;
    for (auto &s : exp_scores) s.score = std::exp(s.score);
    for (auto &s : affine) s.score = 2.5 * s.score - 4.0;
    worst_transform = std::max({worst_transform, std::abs(ComputeEer(exp_scores) - eer),
                                std::abs(ComputeEer(affine) - eer)});
  }
  Report(4, "EER oracle equivalence", worst_oracle < kEerTol && worst_transform < kEerTol,
         std::to_string(kEerInstances) + " instances up to " + std::to_string(largest) +
             " trials, max |eer - oracle| " + Fmt("%.2e", worst_oracle) +
             ", max transform drift " + Fmt("%.2e", worst_transform));
}

// ---------------------------------------------------------------------------
// 5. Kernel identities.

void CriterionKernel(const std::vector<SeedRun> &runs) {
  Rng rng(505);
  bool self_one = true;
  for (int k = 0; k < 1000; ++k) {
    Vec64 v(1 + rng.Below(64));
    for (double &x : v) x = rng.Gaussian() * std::exp(rng.Uniform(-10, 10));
    self_one = self_one && AnchorKernel(v, v, 5.0) == 1.0;
  }
  bool kcc_one = true, bound = true;
  double min_kernel = std::numeric_limits<double>::infinity();
  for (const SeedRun &r : runs) {
    kcc_one = kcc_one && r.first_batch && r.first_batch->k_clean_clean == 1.0;
    bound = bound && r.min_batch_kernel >= 2.0;
    min_kernel = std::min(min_kernel, r.min_batch_kernel);
  }
  Report(5, "kernel identities", self_one && kcc_one && bound,
         std::string("K(v,v,5)==1 on 1000 vectors: ") + (self_one ? "yes" : "no") +
             "; step-0 k_cc==1 in all stage-2 runs: " + (kcc_one ? "yes" : "no") +
             "; min batch kernel " + Fmt("%.6f", min_kernel) + " (>= 2)");
}

// ---------------------------------------------------------------------------
// 6 and 7. Qualitative pattern over seeds.

void CriterionPattern(const std::vector<SeedRun> &runs, double seconds) {
  int a = 0, b = 0, c = 0;
  for (const SeedRun &r : runs) {
    a += r.stage2.average_noisy_eer < r.stage1.average_noisy_eer;
    b += r.joint.clean_eer > r.stage2.clean_eer;
    c += r.stage2.clean_eer <= kCleanEerSlack * r.stage1.clean_eer;
  }
  const bool pass = a >= kRequiredSeeds && b >= kRequiredSeeds && c >= kRequiredSeeds &&
                    seconds < kBenchmarkBudgetSeconds;
  const std::string n = "/" + std::to_string(runs.size());
  Report(6, "stage-wise vs baseline and joint EER pattern", pass,
         "(a) noisy s2<s1 " + std::to_string(a) + n + ", (b) clean joint>s2 " +
             std::to_string(b) + n + ", (c) clean s2<=1.25*s1 " + std::to_string(c) + n +
             ", " + Fmt("%.0f s", seconds));
}

void CriterionGeometry(const std::vector<SeedRun> &runs) {
  int ok = 0;
  for (const SeedRun &r : runs)
    ok += r.stage2.noisy_geometry.intra_var < r.stage1.noisy_geometry.intra_var &&
          r.stage2.noisy_geometry.ratio > r.joint.noisy_geometry.ratio;
  Report(7, "noisy embedding geometry", ok >= kRequiredSeeds,
         "s2 intra < s1 intra and s2 ratio > joint ratio in " + std::to_string(ok) + "/" +
             std::to_string(runs.size()) + " seeds (pooled noisy test set)");
}

// ---------------------------------------------------------------------------
// 8. Exact decomposition, pooling symmetry, AAM reduction.

void CriterionDecomposition() {
  Rng rng(808);
  double worst_decomp = 0.0;
  for (int k = 0; k < 200; ++k) {
    const std::size_t n = 2 + rng.Below(200), dim = 1 + rng.Below(32);
    const int speakers = 2 + static_cast<int>(rng.Below(10));
    std::vector<Vec64> e;
    std::vector<int> labels;
    for (std::size_t i = 0; i < n; ++i) {
      Vec64 v(dim);
      for (double &x : v) x = rng.Gaussian();
      e.push_back(v);
      labels.push_back(i < 2 ? static_cast<int>(i)
                             : static_cast<int>(rng.Below(static_cast<std::uint64_t>(speakers))));
    }
    GeometryStats g = ComputeGeometry(e, labels);
    worst_decomp = std::max(worst_decomp, std::abs(g.total_var - (g.intra_var + g.inter_var)));
  }

  bool permutation = true;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng r(MixSeed(seed, 8));
    ExtractorParams p = InitExtractor(ModelConfig{}, r);
    Mat64 frames = RandomFrames(r, 50, 16);
    std::vector<std::size_t> order(50);
    std::iota(order.begin(), order.end(), 0);
    r.Shuffle(order);
    Mat64 permuted(50, 16);
    for (std::size_t t = 0; t < 50; ++t)
      for (std::size_t d = 0; d < 16; ++d) permuted(t, d) = frames(order[t], d);
    permutation = permutation && ForwardEmbed(p, frames) == ForwardEmbed(p, permuted);
  }

  double worst_aam = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng r(MixSeed(seed, 9));
    HeadParams head = InitHead(ModelConfig{}, r);
    Vec64 e(32);
    for (double &x : e) x = r.Gaussian();
    const double scale = 30.0;
    const auto label = static_cast<std::size_t>(r.Below(32));
    Vec64 aam = ForwardLogits(head, e, HeadMode::Aam(0.0, scale), label);
    const double en = Norm(e);
    for (std::size_t j = 0; j < aam.size(); ++j) {
      const double normalized = scale * Dot(e, head.w.row(j)) / (en * Norm(head.w.row(j)));
      worst_aam = std::max(worst_aam, std::abs(aam[j] - normalized));
    }
  }
  Report(8, "exact decomposition and symmetries",
         worst_decomp < kDecompTol && permutation && worst_aam < kAamTol,
         "max |total - intra - inter| " + Fmt("%.2e", worst_decomp) +
             " over 200 instances; pooling permutation bitwise: " +
             (permutation ? "yes" : "no") + "; max |AAM(m=0) - normalized softmax| " +
             Fmt("%.2e", worst_aam));
}

// ---------------------------------------------------------------------------
// 9. CLI determinism.

#ifdef ANCHORSV_HAVE_CLI
void CriterionCli() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "anchorsv-acceptance-cli";
  fs::remove_all(root);
  fs::create_directories(root);
  {
    std::ofstream cfg(root / "short.cfg");
    cfg << "epochs = 3\n";
  }
  std::ostringstream sink;
  bool ok = true;
  std::vector<std::string> failures;
  auto run = [&](std::vector<std::string> args) {
    if (cli::Run(args, sink, sink) != 0) {
      ok = false;
      failures.push_back(args[0]);
    }
  };
  auto compare = [&](const std::string &a, const std::string &b,
                     const std::vector<std::string> &files) {
    for (const std::string &f : files) {
      if (!fs::exists(root / a / f) || FileSha256(root / a / f) != FileSha256(root / b / f)) {
        ok = false;
        failures.push_back(a + "/" + f);
      }
    }
  };
  const std::string cfg = (root / "short.cfg").string();
  for (const char *d : {"gen1", "gen2"})
    run({"gen", "--seed", "7", "--speakers", "8", "--test-speakers", "4", "--utts", "6",
         "--trials-target", "40", "--trials-nontarget", "80", "--out", (root / d).string()});
  compare("gen1", "gen2",
          {"train/dataset.txt", "train/manifest.txt", "train/feats.txt", "test/dataset.txt",
           "test/manifest.txt", "test/feats.txt", "trials.txt"});
  const std::string data = (root / "gen1").string();
  for (const char *d : {"s1a", "s1b"})
    run({"train", "--stage", "1", "--config", cfg, "--data", data, "--out", (root / d).string()});
  const std::string base = (root / "s1a" / "model.ckpt").string();
  for (const char *d : {"s2a", "s2b"})
    run({"train", "--stage", "2", "--config", cfg, "--data", data, "--base", base, "--out",
         (root / d).string()});
  for (const char *d : {"ja", "jb"})
    run({"train", "--stage", "joint", "--config", cfg, "--data", data, "--out",
         (root / d).string()});
  for (auto [a, b] : {std::pair{"s1a", "s1b"}, {"s2a", "s2b"}, {"ja", "jb"}})
    compare(a, b, {"model.ckpt", "train_log.csv", "config.txt"});
  for (const char *d : {"ea", "eb"})
    run({"eval", "--model", base, "--data", data, "--seed", "3", "--out", (root / d).string()});
  compare("ea", "eb", {"eval.csv", "eval.json"});
  for (const char *d : {"pa", "pb"})
    run({"plotdata", "--model", base, "--data", data, "--out", (root / d).string()});
  compare("pa", "pb", {"points.csv", "stats.json"});
  fs::remove_all(root);
  std::string detail = "gen, train (1, 2, joint), eval, plotdata rerun: ";
  if (ok) {
    detail += "all primary outputs byte-identical";
  } else {
    detail += "mismatch or failure in";
    for (const auto &f : failures) detail += " " + f;
  }
  Report(9, "CLI determinism", ok, detail);
}
#else
void CriterionCli() { Report(9, "CLI determinism", false, "command-line tool not built"); }
#endif

}  // namespace
}  // namespace anchorsv

// Optional arguments select criteria by number; no arguments runs all.
int main(int argc, char **argv) {
  using namespace anchorsv;
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  auto want = [&](int id) {
    return selected.empty() || std::find(selected.begin(), selected.end(), id) != selected.end();
  };
  if (want(1)) CriterionGradients();
  if (want(3)) CriterionSnr();
  if (want(4)) CriterionEer();
  if (want(8)) CriterionDecomposition();

  if (want(2) || want(5) || want(6) || want(7)) {
    std::printf("  reference benchmark: %d seeds\n", kBenchmarkSeeds);
    const auto start = Clock::now();
    std::vector<SeedRun> runs;
    for (int s = 1; s <= kBenchmarkSeeds; ++s)
      runs.push_back(RunSeed(static_cast<std::uint64_t>(s)));
    const double seconds = Seconds(start);
    if (want(2)) CriterionFreeze(runs.front());
    if (want(5)) CriterionKernel(runs);
    if (want(6)) CriterionPattern(runs, seconds);
    if (want(7)) CriterionGeometry(runs);
  }
  if (want(9)) CriterionCli();

  std::printf("%s: %d criteria failed\n", g_failures == 0 ? "ALL PASS" : "SOME FAIL", g_failures);
  return g_failures == 0 ? 0 : 1;
}
