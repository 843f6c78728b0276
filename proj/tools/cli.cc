// tools/cli.cc

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

#include "cli.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "anchorsv/checkpoint.h"
#include "anchorsv/config.h"
#include "anchorsv/corpus_io.h"
#include "anchorsv/datagen.h"
#include "anchorsv/digest.h"
#include "anchorsv/error.h"
#include "anchorsv/eval.h"
#include "anchorsv/trainer.h"

#ifndef ANCHORSV_VERSION
#define ANCHORSV_VERSION "unknown"
#endif

namespace anchorsv::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

// Raised for bad flag values found after CLI11 parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kInfeasible:
      return kExitUsage;
    case ErrorKind::kIo:
    case ErrorKind::kParse:
      return kExitIo;
    case ErrorKind::kNonFinite:
    case ErrorKind::kZeroVector:
    case ErrorKind::kZeroPower:
      return kExitNumeric;
    case ErrorKind::kDegenerate:
    case ErrorKind::kShapeMismatch:
    case ErrorKind::kUnknownId:
      return kExitDegenerate;
    case ErrorKind::kAnchorNotFrozen:
    case ErrorKind::kFrozenBranch:
      return kExitInternal;
  }
  return kExitInternal;
}

// Holds <dir>/.lock for the lifetime of a command so two processes never
// write the same output directory.
class DirLock {
 public:
  explicit DirLock(const fs::path &dir) : path_(dir / ".lock") {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) Fail(ErrorKind::kIo, "cannot create " + dir.string() + ": " + ec.message());
    file_ = std::fopen(path_.c_str(), "wx");
    if (file_ == nullptr)
      Fail(ErrorKind::kIo, "output directory " + dir.string() +
                               " is locked by another run (remove " + path_.string() +
                               " if stale)");
  }
  ~DirLock() {
    std::fclose(file_);
    std::error_code ec;
    fs::remove(path_, ec);
  }
  DirLock(const DirLock &) = delete;
  DirLock &operator=(const DirLock &) = delete;

 private:
  fs::path path_;
  std::FILE *file_ = nullptr;
};

void WriteText(const fs::path &path, const std::string &text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) Fail(ErrorKind::kIo, "cannot write " + path.string());
  os << text;
  if (!os) Fail(ErrorKind::kIo, "write failed: " + path.string());
}

// One record per run, written last. Everything except "timing" is a pure
// function of the inputs.
class Manifest {
 public:
  Manifest(std::string command, const std::vector<std::string> &args)
      : start_(std::chrono::steady_clock::now()) {
    doc_["format"] = "anchorsv-manifest-1";
    doc_["command"] = std::move(command);
    doc_["args"] = args;
    doc_["version"] = ANCHORSV_VERSION;
  }
  Json &operator[](const char *key) { return doc_[key]; }

  void AddInput(const std::string &role, const fs::path &path) {
    if (fs::is_directory(path)) {
      Json files = Json::object();
      for (const char *f : {"dataset.txt", "manifest.txt", "feats.txt"})
        if (fs::exists(path / f)) files[f] = FileSha256(path / f);
      doc_["inputs"][role] = {{"path", path.string()}, {"sha256", files}};
    } else {
      doc_["inputs"][role] = {{"path", path.string()}, {"sha256", FileSha256(path)}};
    }
  }
  void AddOutput(const fs::path &dir, const std::string &rel) {
    doc_["outputs"][rel] = FileSha256(dir / rel);
  }
  void Write(const fs::path &dir) {
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    Json content = doc_;
    doc_["content_sha256"] = Sha256Hex(content.dump());
    doc_["timing"] = {{"wall_clock_seconds", seconds}};
    WriteText(dir / "manifest.json", doc_.dump(2) + "\n");
  }

 private:
  Json doc_;
  std::chrono::steady_clock::time_point start_;
};

// Accepts either a split directory or a corpus root containing <split>/.
fs::path ResolveSplit(const fs::path &data, const char *split) {
  if (fs::exists(data / "dataset.txt")) return data;
  if (fs::exists(data / split / "dataset.txt")) return data / split;
  Fail(ErrorKind::kIo, "no corpus at " + data.string() + " (expected dataset.txt or " + split +
                           "/dataset.txt)");
}

std::vector<std::string> SplitList(const std::string &text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<double> ParseSnrs(const std::string &text) {
  std::vector<double> out;
  for (const std::string &s : SplitList(text)) {
    if (s == "inf") {
      out.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    try {
      out.push_back(ParseDouble(s));
    } catch (const Error &) {
      throw UsageError("--snrs: bad value '" + s + "'");
    }
  }
  if (out.empty()) throw UsageError("--snrs: empty list");
  return out;
}

std::vector<NoiseKind> ParseKinds(const std::string &text, const char *flag) {
  std::vector<NoiseKind> out;
  for (const std::string &s : SplitList(text)) {
    try {
      out.push_back(ParseNoiseKind(s));
    } catch (const Error &) {
      throw UsageError(std::string(flag) + ": unknown noise kind '" + s + "'");
    }
  }
  if (out.empty()) throw UsageError(std::string(flag) + ": empty list");
  return out;
}

std::string JoinKinds(const std::vector<NoiseKind> &kinds) {
  std::string s;
  for (NoiseKind k : kinds) s += (s.empty() ? "" : ",") + std::string(NoiseKindName(k));
  return s;
}

// ---------------------------------------------------------------------------
// gen

struct GenOptions {
  std::uint64_t seed = 1;
  int speakers = 32;
  int test_speakers = 16;
  int utts = 20;
  int frames = 50;
  int dim = 16;
  double intra = 0.3;
  double channel = 0.1;
  std::size_t n_target = 3000;
  std::size_t n_nontarget = 6000;
  std::string out;
};

int CmdGen(const GenOptions &o, const std::vector<std::string> &args, std::ostream &out) {
  const fs::path dir(o.out);
  DirLock lock(dir);
  Manifest manifest("gen", args);
  CorpusParams p;
  p.seed = o.seed;
  p.n_speakers = o.speakers + o.test_speakers;
  p.utts_per_speaker = o.utts;
  p.frames = o.frames;
  p.dim = o.dim;
  p.intra_spread = o.intra;
  p.channel_spread = o.channel;
  auto [train, test] = SplitBySpeaker(SynthCorpus(p), o.test_speakers);
  std::vector<Trial> trials;
  try {
    trials = MakeTrials(test, o.seed, o.n_target, o.n_nontarget);
  } catch (const Error &e) {
    if (e.kind() != ErrorKind::kInfeasible) throw;
    throw UsageError(std::string(e.what()) + " (adjust --trials-target / --trials-nontarget)");
  }
  WriteDataset(dir / "train", train);
  WriteDataset(dir / "test", test);
  WriteTrials(dir / "trials.txt", trials);

  manifest["seeds"] = {{"corpus", o.seed}, {"trials", o.seed}};
  manifest["params"] = {{"train_speakers", o.speakers}, {"test_speakers", o.test_speakers},
                        {"utts_per_speaker", o.utts},   {"frames", o.frames},
                        {"dim", o.dim},                 {"intra_spread", o.intra},
                        {"channel_spread", o.channel},  {"trials_target", o.n_target},
                        {"trials_nontarget", o.n_nontarget}};
  for (const char *split : {"train", "test"})
    for (const char *f : {"dataset.txt", "manifest.txt", "feats.txt"})
      manifest.AddOutput(dir, std::string(split) + "/" + f);
  manifest.AddOutput(dir, "trials.txt");
  manifest.Write(dir);
  out << "wrote " << train.utterances.size() << " train and " << test.utterances.size()
      << " test utterances, " << trials.size() << " trials to " << dir.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train

struct TrainOptions {
  std::string stage;
  std::string config;
  std::string data;
  std::string base;
  std::string out;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
};

int CmdTrain(const TrainOptions &o, const std::vector<std::string> &args, std::ostream &out,
             std::ostream &err) {
  TrainConfig config;
  if (!o.config.empty()) config = LoadConfig(o.config);
  try {
    config.stage = ParseStage(o.stage);
    for (const std::string &kv : o.sets) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
      ApplyConfigValue(&config, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (o.seed) config.seed = *o.seed;
    if (o.epochs) config.epochs = *o.epochs;
    config.Validate();
  } catch (const Error &e) {
    throw UsageError(e.what());
  }
  if (config.stage == Stage::kStage2 && o.base.empty())
    throw UsageError("--stage 2 requires --base <stage-1 checkpoint>");
  if (config.stage != Stage::kStage2 && !o.base.empty())
    throw UsageError("--base is only used with --stage 2");

  const fs::path data_dir = ResolveSplit(o.data, "train");
  const Dataset train = ReadDataset(data_dir);
  const fs::path dir(o.out);
  DirLock lock(dir);
  Manifest manifest("train", args);
  manifest.AddInput("data", data_dir);
  if (!o.config.empty()) manifest.AddInput("config", o.config);

  const std::string config_text = ConfigToText(config);
  BranchState model;
  TrainLog log;
  if (config.stage == Stage::kStage1) {
    TrainResult r = TrainStage1(config, train);
    model = std::move(r.branch);
    log = std::move(r.log);
  } else if (config.stage == Stage::kJoint) {
    TrainResult r = TrainJoint(config, train);
    model = std::move(r.branch);
    log = std::move(r.log);
  } else {
    manifest.AddInput("base", o.base);
    Checkpoint base = LoadCheckpoint(o.base);
    if (base.stage != "1")
      err << "warning: base checkpoint has stage tag '" << base.stage << "', expected '1'\n";
    Stage2Result r = TrainStage2(config, train, base.branch);
    if (ParamDigest(r.anchor) != r.anchor_digest_at_clone)
      Fail(ErrorKind::kAnchorNotFrozen, "anchor parameters changed during stage 2");
    manifest["base_digest"] = ParamDigest(base.branch);
    manifest["anchor_digest"] = r.anchor_digest_at_clone;
    if (r.log.first_batch)
      manifest["first_batch"] = {{"k_clean_noise", r.log.first_batch->k_clean_noise},
                                 {"k_clean_clean", r.log.first_batch->k_clean_clean},
                                 {"ce_noisy", r.log.first_batch->ce_noisy},
                                 {"total", r.log.first_batch->total}};
    manifest["min_batch_kernel"] = r.log.min_batch_kernel;
    model = std::move(r.trainable);
    log = std::move(r.log);
  }

  SaveCheckpoint(dir / "model.ckpt", Checkpoint{model, std::string(StageName(config.stage)),
                                                config.seed});
  WriteText(dir / "train_log.csv", log.ToCsv());
  WriteText(dir / "config.txt", config_text);
  manifest["stage"] = StageName(config.stage);
  manifest["seeds"] = {{"train", config.seed}};
  manifest["config_digest"] = Sha256Hex(config_text);
  manifest["model_digest"] = ParamDigest(model);
  manifest["steps"] = log.steps;
  for (const char *f : {"model.ckpt", "train_log.csv", "config.txt"}) manifest.AddOutput(dir, f);
  manifest.Write(dir);
  for (const EpochRecord &r : log.epochs)
    out << "epoch " << r.epoch << " loss " << FormatDouble(r.loss) << "\n";
  out << "wrote " << (dir / "model.ckpt").string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalCmdOptions {
  std::string model;
  std::string data;
  std::string trials;
  std::string snrs = "0,5,10,15,20";
  std::string noise = "white,babble,tonal";
  std::string geometry = "noisy";
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out;
};

fs::path DefaultTrials(const fs::path &data, const fs::path &split_dir) {
  for (const fs::path &p : {data / "trials.txt", split_dir.parent_path() / "trials.txt"})
    if (fs::exists(p)) return p;
  throw UsageError("no --trials given and no trials.txt next to the data");
}

int CmdEval(const EvalCmdOptions &o, const std::vector<std::string> &args, std::ostream &out) {
  EvalOptions opt;
  opt.snr_grid = ParseSnrs(o.snrs);
  opt.noise_kinds = ParseKinds(o.noise, "--noise");
  opt.seed = o.seed;
  opt.threads = o.threads;
  if (o.geometry != "noisy") {
    try {
      opt.geometry_condition = Condition::Parse(o.geometry);
    } catch (const Error &e) {
      throw UsageError(std::string("--geometry: ") + e.what());
    }
  }
  const fs::path split_dir = ResolveSplit(o.data, "test");
  const fs::path trials_path = o.trials.empty() ? DefaultTrials(o.data, split_dir) : fs::path(o.trials);
  const Checkpoint ck = LoadCheckpoint(o.model);
  const Dataset test = ReadDataset(split_dir);
  const std::vector<Trial> trials = ReadTrials(trials_path);
  const EvalReport report = FullEval(ck.branch.extractor, test, trials, opt);

  const fs::path dir(o.out);
  DirLock lock(dir);
  Manifest manifest("eval", args);
  manifest.AddInput("model", o.model);
  manifest.AddInput("data", split_dir);
  manifest.AddInput("trials", trials_path);
  manifest["seeds"] = {{"eval_noise", o.seed}};
  manifest["model_digest"] = ParamDigest(ck.branch);
  manifest["noise_kinds"] = JoinKinds(opt.noise_kinds);
  WriteText(dir / "eval.csv", report.ToCsv());
  WriteText(dir / "eval.json", report.ToJson());
  manifest.AddOutput(dir, "eval.csv");
  manifest.AddOutput(dir, "eval.json");
  manifest.Write(dir);
  out << "clean EER " << FormatDouble(report.clean_eer) << ", average noisy EER "
      << FormatDouble(report.average_noisy_eer) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// plotdata

struct PlotOptions {
  std::string model;
  std::string data;
  std::string conditions = "clean,white@5,babble@5,tonal@5";
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out;
};

Json StatsJson(const GeometryStats &g) {
  Json j;
  j["inter_var"] = g.inter_var;
  j["intra_var"] = g.intra_var;
  if (std::isinf(g.ratio)) j["ratio"] = "inf";
  else j["ratio"] = g.ratio;
  j["total_var"] = g.total_var;
  return j;
}

int CmdPlotdata(const PlotOptions &o, const std::vector<std::string> &args, std::ostream &out) {
  std::vector<Condition> conditions;
  for (const std::string &c : SplitList(o.conditions)) {
    try {
      conditions.push_back(Condition::Parse(c));
    } catch (const Error &e) {
      throw UsageError(std::string("--conditions: ") + e.what());
    }
  }
  if (conditions.empty()) throw UsageError("--conditions: empty list");
  const fs::path split_dir = ResolveSplit(o.data, "test");
  const Checkpoint ck = LoadCheckpoint(o.model);
  const Dataset data = ReadDataset(split_dir);
  if (data.utterances.empty()) Fail(ErrorKind::kDegenerate, "dataset has no utterances");

  std::vector<Vec64> all;
  std::vector<int> labels;
  std::vector<std::pair<std::string, std::string>> keys;  // (utt id, condition)
  Json per_condition = Json::object();
  for (const Condition &c : conditions) {
    const Dataset ds = c.noisy ? RemixDataset(data, c, o.seed) : data;
    auto unit = LengthNormalized(ExtractEmbeddings(ck.branch.extractor, ds, o.threads));
    std::vector<int> l;
    for (const Utterance &u : ds.utterances) {
      l.push_back(u.speaker);
      keys.emplace_back(u.id, c.ToString());
    }
    per_condition[c.ToString()] = StatsJson(ComputeGeometry(unit, l));
    all.insert(all.end(), unit.begin(), unit.end());
    labels.insert(labels.end(), l.begin(), l.end());
  }
  const Projection proj = Project2d(all);

  std::ostringstream csv;
  csv << "utt_id,speaker,condition,x,y\n";
  for (std::size_t i = 0; i < all.size(); ++i)
    csv << keys[i].first << ',' << labels[i] << ',' << keys[i].second << ','
        << FormatDouble(proj.points[i][0]) << ',' << FormatDouble(proj.points[i][1]) << '\n';
  Json stats;
  stats["format"] = "anchorsv-plotstats-1";
  stats["embedding_space"] = "length-normalized";
  stats["all"] = StatsJson(ComputeGeometry(all, labels));
  stats["conditions"] = per_condition;
  stats["projection"] = {{"lambda1", proj.lambda1},
                         {"lambda2", proj.lambda2},
                         {"variance_share", proj.variance_share}};

  const fs::path dir(o.out);
  DirLock lock(dir);
  Manifest manifest("plotdata", args);
  manifest.AddInput("model", o.model);
  manifest.AddInput("data", split_dir);
  manifest["seeds"] = {{"eval_noise", o.seed}};
  WriteText(dir / "points.csv", csv.str());
  WriteText(dir / "stats.json", stats.dump(2) + "\n");
  manifest.AddOutput(dir, "points.csv");
  manifest.AddOutput(dir, "stats.json");
  manifest.Write(dir);
  out << "wrote " << all.size() << " points to " << (dir / "points.csv").string() << "\n";
  return kExitOk;
}

}  // namespace

int Run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Anchor-guided robust speaker embedding toolkit", "anchorsv"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ANCHORSV_VERSION);

  GenOptions gen;
  auto *g = app.add_subcommand("gen", "Generate a synthetic train/test corpus and trial list");
  g->add_option("--seed", gen.seed, "Corpus and trial seed")->capture_default_str();
  g->add_option("--speakers", gen.speakers, "Training speakers")
      ->check(CLI::PositiveNumber)->capture_default_str();
  g->add_option("--test-speakers", gen.test_speakers, "Held-out test speakers")
      ->check(CLI::Range(2, 1 << 20))->capture_default_str();
  g->add_option("--utts", gen.utts, "Utterances per speaker")
      ->check(CLI::Range(2, 1 << 20))->capture_default_str();
  g->add_option("--frames", gen.frames, "Frames per utterance")
      ->check(CLI::Range(2, 1 << 20))->capture_default_str();
  g->add_option("--dim", gen.dim, "Feature dimension")
      ->check(CLI::PositiveNumber)->capture_default_str();
  g->add_option("--intra", gen.intra, "Per-utterance offset scale")
      ->check(CLI::NonNegativeNumber)->capture_default_str();
  g->add_option("--channel", gen.channel, "Per-frame jitter scale")
      ->check(CLI::NonNegativeNumber)->capture_default_str();
  g->add_option("--trials-target", gen.n_target, "Target trials")->capture_default_str();
  g->add_option("--trials-nontarget", gen.n_nontarget, "Nontarget trials")
      ->capture_default_str();
  g->add_option("--out", gen.out, "Output directory")->required();

  TrainOptions train;
  auto *t = app.add_subcommand("train", "Train a stage-1, stage-2 or joint model");
  t->add_option("--stage", train.stage, "1, 2 or joint")
      ->required()->check(CLI::IsMember({"1", "2", "joint"}));
  t->add_option("--config", train.config, "key = value config file")->check(CLI::ExistingFile);
  t->add_option("--data", train.data, "Corpus root or train split directory")->required();
  t->add_option("--base", train.base, "Stage-1 checkpoint (stage 2 only)");
  t->add_option("--out", train.out, "Output directory")->required();
  t->add_option("--set", train.sets, "Config override key=value (repeatable)");
  t->add_option("--seed", train.seed, "Override the config seed");
  t->add_option("--epochs", train.epochs, "Override the config epochs");

  EvalCmdOptions ev;
  auto *e = app.add_subcommand("eval", "Score clean and noise-remixed trials");
  e->add_option("--model", ev.model, "Checkpoint")->required();
  e->add_option("--data", ev.data, "Corpus root or test split directory")->required();
  e->add_option("--trials", ev.trials, "Trial list (default: trials.txt next to the data)");
  e->add_option("--snrs", ev.snrs, "Comma-separated SNRs in dB")->capture_default_str();
  e->add_option("--noise", ev.noise, "Comma-separated noise kinds")->capture_default_str();
  e->add_option("--geometry", ev.geometry,
                "Noisy geometry source: 'noisy' (all noisy cells pooled) or a condition")
      ->capture_default_str();
  e->add_option("--seed", ev.seed, "Evaluation noise seed")->capture_default_str();
  e->add_option("--threads", ev.threads, "Embedding threads")
      ->check(CLI::PositiveNumber)->capture_default_str();
  e->add_option("--out", ev.out, "Output directory")->required();

  PlotOptions plot;
  auto *pl = app.add_subcommand("plotdata", "Export a 2-D PCA projection of test embeddings");
  pl->add_option("--model", plot.model, "Checkpoint")->required();
  pl->add_option("--data", plot.data, "Corpus root or test split directory")->required();
  pl->add_option("--conditions", plot.conditions, "Comma-separated conditions")
      ->capture_default_str();
  pl->add_option("--seed", plot.seed, "Evaluation noise seed")->capture_default_str();
  pl->add_option("--threads", plot.threads, "Embedding threads")
      ->check(CLI::PositiveNumber)->capture_default_str();
  pl->add_option("--out", plot.out, "Output directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError &pe) {
    const int code = app.exit(pe, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (g->parsed()) return CmdGen(gen, args, out);
    if (t->parsed()) return CmdTrain(train, args, out, err);
    if (e->parsed()) return CmdEval(ev, args, out);
    if (pl->parsed()) return CmdPlotdata(plot, args, out);
  } catch (const UsageError &ue) {
    err << "error: " << ue.what() << "\n";
    return kExitUsage;
  } catch (const NonFiniteStep &nf) {
    err << "error: non-finite value at training step " << nf.step() << ": " << nf.what()
        << "\n";
    return kExitNumeric;
  } catch (const Error &ae) {
    err << "error (" << ErrorKindName(ae.kind()) << "): " << ae.what() << "\n";
    return ExitCodeFor(ae.kind());
  } catch (const std::exception &ex) {
    err << "internal error: " << ex.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace anchorsv::cli
