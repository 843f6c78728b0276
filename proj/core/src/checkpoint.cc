// core/src/checkpoint.cc

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

#include "anchorsv/checkpoint.h"

#include <fstream>
#include <sstream>

#include "anchorsv/corpus_io.h"
#include "anchorsv/error.h"

namespace anchorsv {

void SaveCheckpoint(std::ostream &os, const Checkpoint &ck) {
  const ModelConfig c = ck.branch.config();
  const auto blocks = Blocks(ck.branch);
  os << "anchorsv-checkpoint " << kCheckpointVersion << '\n'
     << "arch " << c.input_dim << ' ' << c.hidden_dim << ' ' << c.embed_dim << ' '
     << c.n_classes << ' ' << (c.head_bias ? 1 : 0) << '\n'
     << "stage " << ck.stage << '\n'
     << "seed " << ck.seed << '\n'
     << "frozen " << (ck.branch.frozen ? 1 : 0) << '\n'
     << "blocks " << blocks.size() << '\n';
  for (const auto &b : blocks) {
    os << "block " << b.name << ' ' << b.shape.size();
    for (std::size_t d : b.shape) os << ' ' << d;
    os << '\n';
    for (double v : b.values) os << FormatDouble(v) << '\n';
  }
  os << "end\n";
}

namespace {

void Expect(std::istream &is, const std::string &word) {
  std::string tok;
  if (!(is >> tok) || tok != word)
    Fail(ErrorKind::kParse, "checkpoint: expected '" + word + "', got '" + tok + "'");
}

template <typename T>
T ReadValue(std::istream &is, const char *what) {
  T v{};
  if (!(is >> v)) Fail(ErrorKind::kParse, std::string("checkpoint: bad ") + what);
  return v;
}

}  // namespace

Checkpoint LoadCheckpoint(std::istream &is) {
  Expect(is, "anchorsv-checkpoint");
  int version = ReadValue<int>(is, "version");
  if (version != kCheckpointVersion)
    Fail(ErrorKind::kParse, "unsupported checkpoint version " + std::to_string(version));
  Expect(is, "arch");
  ModelConfig c;
  c.input_dim = ReadValue<std::size_t>(is, "input_dim");
  c.hidden_dim = ReadValue<std::size_t>(is, "hidden_dim");
  c.embed_dim = ReadValue<std::size_t>(is, "embed_dim");
  c.n_classes = ReadValue<std::size_t>(is, "n_classes");
  c.head_bias = ReadValue<int>(is, "head_bias") != 0;
  Checkpoint ck;
  Expect(is, "stage");
  ck.stage = ReadValue<std::string>(is, "stage");
  Expect(is, "seed");
  ck.seed = ReadValue<std::uint64_t>(is, "seed");
  Expect(is, "frozen");
  const bool frozen = ReadValue<int>(is, "frozen") != 0;
  Expect(is, "blocks");
  const auto n_blocks = ReadValue<std::size_t>(is, "block count");

  // Shapes come from the arch line; the file must agree with them exactly.
  ck.branch = ZerosLike(InitBranch(c, 0));
  auto blocks = MutableBlocks(ck.branch);
  if (n_blocks != blocks.size())
    Fail(ErrorKind::kParse, "checkpoint has " + std::to_string(n_blocks) +
                                " blocks, architecture needs " + std::to_string(blocks.size()));
  std::string tok;
  for (auto &b : blocks) {
    Expect(is, "block");
    Expect(is, b.name);
    const auto rank = ReadValue<std::size_t>(is, "rank");
    std::vector<std::size_t> shape(rank);
    for (auto &d : shape) d = ReadValue<std::size_t>(is, "dim");
    if (shape != b.shape) Fail(ErrorKind::kShapeMismatch, "block " + b.name + " has wrong shape");
    for (double &v : b.values) {
      if (!(is >> tok)) Fail(ErrorKind::kParse, "checkpoint truncated in " + b.name);
      v = ParseDouble(tok);
    }
  }
  Expect(is, "end");
  if (!AllFinite(ck.branch)) Fail(ErrorKind::kNonFinite, "checkpoint has non-finite values");
  ck.branch.frozen = frozen;
  return ck;
}

void SaveCheckpoint(const std::filesystem::path &path, const Checkpoint &ck) {
  std::ostringstream ss;
  SaveCheckpoint(ss, ck);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) Fail(ErrorKind::kIo, "cannot write " + path.string());
  os << ss.str();
  if (!os) Fail(ErrorKind::kIo, "write failed: " + path.string());
}

Checkpoint LoadCheckpoint(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Fail(ErrorKind::kIo, "cannot read " + path.string());
  return LoadCheckpoint(is);
}

}  // namespace anchorsv
