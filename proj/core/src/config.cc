// core/src/config.cc

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

#include "anchorsv/config.h"

#include <fstream>
#include <sstream>
#include <string>

#include "anchorsv/corpus_io.h"
#include "anchorsv/error.h"

namespace anchorsv {

std::string_view StageName(Stage stage) {
  switch (stage) {
    case Stage::kStage1: return "1";
    case Stage::kStage2: return "2";
    case Stage::kJoint: return "joint";
  }
  return "?";
}

Stage ParseStage(std::string_view text) {
  if (text == "1") return Stage::kStage1;
  if (text == "2") return Stage::kStage2;
  if (text == "joint") return Stage::kJoint;
  Fail(ErrorKind::kInvalidArgument, "stage must be 1, 2 or joint, got '" + std::string(text) + "'");
}

namespace {

[[noreturn]] void BadKey(std::string_view key, const std::string &why) {
  Fail(ErrorKind::kInvalidArgument, "config key '" + std::string(key) + "': " + why);
}

double AsDouble(std::string_view key, std::string_view v) {
  try {
    return ParseDouble(v);
  } catch (const Error &) {
    BadKey(key, "expected a number, got '" + std::string(v) + "'");
  }
}

long long AsInt(std::string_view key, std::string_view v) {
  double d = AsDouble(key, v);
  if (d != static_cast<double>(static_cast<long long>(d)))
    BadKey(key, "expected an integer, got '" + std::string(v) + "'");
  return static_cast<long long>(d);
}

std::uint64_t AsU64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  std::istringstream ss{std::string(v)};
  if (!(ss >> out) || !ss.eof()) BadKey(key, "expected an unsigned integer");
  return out;
}

bool AsBool(std::string_view key, std::string_view v) {
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  BadKey(key, "expected true/false");
}

std::string Trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<NoiseKind> AsKinds(std::string_view key, std::string_view v) {
  std::vector<NoiseKind> kinds;
  std::string item;
  std::istringstream ss{std::string(v)};
  while (std::getline(ss, item, ',')) {
    try {
      kinds.push_back(ParseNoiseKind(Trim(item)));
    } catch (const Error &) {
      BadKey(key, "unknown noise kind '" + Trim(item) + "'");
    }
  }
  return kinds;
}

}  // namespace

void ApplyConfigValue(TrainConfig *c, std::string_view key, std::string_view value) {
  const std::string v = Trim(value);
  if (key == "seed") c->seed = AsU64(key, v);
  else if (key == "stage") c->stage = ParseStage(v);
  else if (key == "epochs") c->epochs = static_cast<int>(AsInt(key, v));
  else if (key == "batch_size") c->batch_size = static_cast<int>(AsInt(key, v));
  else if (key == "learning_rate") c->learning_rate = AsDouble(key, v);
  else if (key == "momentum") c->momentum = AsDouble(key, v);
  else if (key == "lr_decay_every") c->lr_decay_every = static_cast<int>(AsInt(key, v));
  else if (key == "lr_decay_factor") c->lr_decay_factor = AsDouble(key, v);
  else if (key == "m") c->m = AsDouble(key, v);
  else if (key == "loss") {
    if (v == "softmax") c->head_mode.kind = HeadMode::Kind::kSoftmax;
    else if (v == "aam") c->head_mode.kind = HeadMode::Kind::kAam;
    else BadKey(key, "expected softmax or aam");
  } else if (key == "aam_margin") c->head_mode.margin = AsDouble(key, v);
  else if (key == "aam_scale") c->head_mode.scale = AsDouble(key, v);
  else if (key == "snr_min") c->snr_min = AsDouble(key, v);
  else if (key == "snr_max") c->snr_max = AsDouble(key, v);
  else if (key == "noise_kinds") c->noise_kinds = AsKinds(key, v);
  else if (key == "clean_prob") c->clean_prob = AsDouble(key, v);
  else if (key == "noisy_copies") c->noisy_copies = static_cast<int>(AsInt(key, v));
  else if (key == "joint_weight") c->joint_weight = AsDouble(key, v);
  else if (key == "stage2_clean_ce") c->stage2_clean_ce = AsBool(key, v);
  else if (key == "stage2_reinit_head") c->stage2_reinit_head = AsBool(key, v);
  else if (key == "hidden_dim") c->hidden_dim = static_cast<std::size_t>(AsInt(key, v));
  else if (key == "embed_dim") c->embed_dim = static_cast<std::size_t>(AsInt(key, v));
  else if (key == "head_bias") c->head_bias = AsBool(key, v);
  else BadKey(key, "unknown key");
}

TrainConfig ParseConfig(std::string_view text, TrainConfig base) {
  std::istringstream ss{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (Trim(line).empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      Fail(ErrorKind::kInvalidArgument, "config line " + std::to_string(lineno) +
                                            " is not 'key = value'");
    ApplyConfigValue(&base, Trim(std::string_view(line).substr(0, eq)),
                     std::string_view(line).substr(eq + 1));
  }
  return base;
}

TrainConfig LoadConfig(const std::filesystem::path &path, TrainConfig base) {
  std::ifstream is(path);
  if (!is) Fail(ErrorKind::kIo, "cannot read config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return ParseConfig(ss.str(), std::move(base));
}

std::string ConfigToText(const TrainConfig &c) {
  std::ostringstream os;
  auto kv = [&os](const char *k, const std::string &v) { os << k << " = " << v << '\n'; };
  auto num = [](double x) { return FormatDouble(x); };
  std::string kinds;
  for (NoiseKind k : c.noise_kinds) {
    if (!kinds.empty()) kinds += ",";
    kinds += NoiseKindName(k);
  }
  kv("seed", std::to_string(c.seed));
  kv("stage", std::string(StageName(c.stage)));
  kv("epochs", std::to_string(c.epochs));
  kv("batch_size", std::to_string(c.batch_size));
  kv("learning_rate", num(c.learning_rate));
  kv("momentum", num(c.momentum));
  kv("lr_decay_every", std::to_string(c.lr_decay_every));
  kv("lr_decay_factor", num(c.lr_decay_factor));
  kv("m", num(c.m));
  kv("loss", c.head_mode.kind == HeadMode::Kind::kAam ? "aam" : "softmax");
  kv("aam_margin", num(c.head_mode.margin));
  kv("aam_scale", num(c.head_mode.scale));
  kv("snr_min", num(c.snr_min));
  kv("snr_max", num(c.snr_max));
  kv("noise_kinds", kinds);
  kv("clean_prob", num(c.clean_prob));
  kv("noisy_copies", std::to_string(c.noisy_copies));
  kv("joint_weight", num(c.joint_weight));
  kv("stage2_clean_ce", c.stage2_clean_ce ? "true" : "false");
  kv("stage2_reinit_head", c.stage2_reinit_head ? "true" : "false");
  kv("hidden_dim", std::to_string(c.hidden_dim));
  kv("embed_dim", std::to_string(c.embed_dim));
  kv("head_bias", c.head_bias ? "true" : "false");
  return os.str();
}

void TrainConfig::Validate() const {
  if (!(learning_rate >= 0.0)) BadKey("learning_rate", "must be >= 0");
  if (epochs < 1) BadKey("epochs", "must be >= 1");
  if (batch_size < 1) BadKey("batch_size", "must be >= 1");
  if (!(momentum >= 0.0 && momentum < 1.0)) BadKey("momentum", "must be in [0, 1)");
  if (lr_decay_every < 0) BadKey("lr_decay_every", "must be >= 0");
  if (!(lr_decay_factor > 0.0)) BadKey("lr_decay_factor", "must be > 0");
  if (!(m > 0.0)) BadKey("m", "must be > 0");
  if (head_mode.kind == HeadMode::Kind::kAam) {
    if (!(head_mode.margin >= 0.0 && head_mode.margin <= 0.5)) BadKey("aam_margin", "must be in [0, 0.5]");
    if (!(head_mode.scale > 0.0)) BadKey("aam_scale", "must be > 0");
  }
  if (!(snr_min >= -10.0 && snr_max <= 40.0 && snr_min <= snr_max))
    BadKey("snr_min", "SNR range must satisfy -10 <= snr_min <= snr_max <= 40");
  if (noise_kinds.empty()) BadKey("noise_kinds", "must list at least one kind");
  if (!(clean_prob >= 0.0 && clean_prob <= 1.0)) BadKey("clean_prob", "must be in [0, 1]");
  if (noisy_copies < 1) BadKey("noisy_copies", "must be >= 1");
  if (!(joint_weight >= 0.0)) BadKey("joint_weight", "must be >= 0");
  if (hidden_dim < 1) BadKey("hidden_dim", "must be >= 1");
  if (embed_dim < 1) BadKey("embed_dim", "must be >= 1");
}

ModelConfig TrainConfig::ModelFor(std::size_t input_dim, std::size_t n_classes) const {
  ModelConfig mc;
  mc.input_dim = input_dim;
  mc.hidden_dim = hidden_dim;
  mc.embed_dim = embed_dim;
  mc.n_classes = n_classes;
  mc.head_bias = head_bias;
  return mc;
}

}  // namespace anchorsv
