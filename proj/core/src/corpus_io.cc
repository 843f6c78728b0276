// core/src/corpus_io.cc

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

#include "anchorsv/corpus_io.h"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "anchorsv/error.h"

namespace anchorsv {

namespace fs = std::filesystem;

std::string FormatDouble(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double ParseDouble(std::string_view text) {
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    Fail(ErrorKind::kParse, "bad number '" + std::string(text) + "'");
  return v;
}

void WriteMatrix(std::ostream &os, const Mat64 &m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c > 0) os << ' ';
      os << FormatDouble(m(r, c));
    }
    os << '\n';
  }
}

Mat64 ReadMatrix(std::istream &is, std::size_t rows, std::size_t cols) {
  Mat64 m(rows, cols);
  std::string tok;
  for (double &v : m.flat()) {
    if (!(is >> tok)) Fail(ErrorKind::kParse, "matrix truncated");
    v = ParseDouble(tok);
  }
  return m;
}

namespace {

std::ofstream OpenOut(const fs::path &path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) Fail(ErrorKind::kIo, "cannot write " + path.string());
  return os;
}

std::ifstream OpenIn(const fs::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Fail(ErrorKind::kIo, "cannot read " + path.string());
  return is;
}

std::string Trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

void WriteDataset(const fs::path &dir, const Dataset &dataset) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) Fail(ErrorKind::kIo, "cannot create " + dir.string() + ": " + ec.message());
  {
    auto os = OpenOut(dir / "dataset.txt");
    os << "format = anchorsv-corpus-1\n"
       << "split = " << SplitName(dataset.split) << '\n'
       << "n_speakers = " << dataset.n_speakers << '\n'
       << "dim = " << dataset.dim << '\n'
       << "utterances = " << dataset.utterances.size() << '\n';
    if (!os) Fail(ErrorKind::kIo, "write failed: " + (dir / "dataset.txt").string());
  }
  auto manifest = OpenOut(dir / "manifest.txt");
  auto feats = OpenOut(dir / "feats.txt");
  for (const Utterance &u : dataset.utterances) {
    manifest << u.id << ' ' << u.speaker << ' ' << u.condition.ToString() << " inline\n";
    feats << u.id << ' ' << u.frames.rows() << ' ' << u.frames.cols() << '\n';
    WriteMatrix(feats, u.frames);
  }
  if (!manifest || !feats) Fail(ErrorKind::kIo, "write failed under " + dir.string());
}

namespace {

struct MatrixRecord {
  std::size_t rows = 0, cols = 0;
  Mat64 m;
};

MatrixRecord ReadRecord(std::istream &is, std::string *id) {
  MatrixRecord rec;
  if (!(is >> *id >> rec.rows >> rec.cols)) Fail(ErrorKind::kParse, "bad matrix header");
  rec.m = ReadMatrix(is, rec.rows, rec.cols);
  return rec;
}

std::size_t ParseCount(const std::string &key, const std::string &val) {
  std::size_t v = 0;
  auto res = std::from_chars(val.data(), val.data() + val.size(), v);
  if (res.ec != std::errc() || res.ptr != val.data() + val.size())
    Fail(ErrorKind::kParse, "dataset.txt: bad value for " + key + ": '" + val + "'");
  return v;
}

}  // namespace

Dataset ReadDataset(const fs::path &dir) {
  Dataset ds;
  std::size_t expected = 0;
  bool have_format = false;
  {
    auto is = OpenIn(dir / "dataset.txt");
    std::string line;
    while (std::getline(is, line)) {
      auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = Trim(std::string_view(line).substr(0, eq));
      std::string val = Trim(std::string_view(line).substr(eq + 1));
      if (key == "format") {
        if (val != "anchorsv-corpus-1") Fail(ErrorKind::kParse, "unsupported corpus format " + val);
        have_format = true;
      } else if (key == "split") {
        ds.split = ParseSplit(val);
      } else if (key == "n_speakers") {
        ds.n_speakers = static_cast<int>(ParseCount(key, val));
      } else if (key == "dim") {
        ds.dim = ParseCount(key, val);
      } else if (key == "utterances") {
        expected = ParseCount(key, val);
      }
    }
  }
  if (!have_format) Fail(ErrorKind::kParse, "dataset.txt has no format line");

  std::map<std::string, Mat64> inline_feats;
  if (fs::exists(dir / "feats.txt")) {
    auto is = OpenIn(dir / "feats.txt");
    std::string id;
    while (is >> std::ws, is.peek() != std::char_traits<char>::eof()) {
      MatrixRecord rec = ReadRecord(is, &id);
      inline_feats.emplace(id, std::move(rec.m));
    }
  }
  auto manifest = OpenIn(dir / "manifest.txt");
  std::string line;
  while (std::getline(manifest, line)) {
    if (Trim(line).empty()) continue;
    std::istringstream ls(line);
    Utterance u;
    std::string cond, storage;
    if (!(ls >> u.id >> u.speaker >> cond >> storage))
      Fail(ErrorKind::kParse, "bad manifest line: " + line);
    u.condition = Condition::Parse(cond);
    if (storage == "inline") {
      auto it = inline_feats.find(u.id);
      if (it == inline_feats.end()) Fail(ErrorKind::kParse, "no inline matrix for " + u.id);
      u.frames = std::move(it->second);
    } else {
      auto is = OpenIn(dir / storage);
      std::string id;
      u.frames = ReadRecord(is, &id).m;
    }
    ds.utterances.push_back(std::move(u));
  }
  if (ds.utterances.size() != expected)
    Fail(ErrorKind::kParse, "manifest lists " + std::to_string(ds.utterances.size()) +
                                " utterances, header says " + std::to_string(expected));
  ds.Validate();
  return ds;
}

void WriteTrials(const fs::path &path, const std::vector<Trial> &trials) {
  auto os = OpenOut(path);
  for (const Trial &t : trials) os << (t.target ? '1' : '0') << ' ' << t.utt_a << ' ' << t.utt_b << '\n';
  if (!os) Fail(ErrorKind::kIo, "write failed: " + path.string());
}

std::vector<Trial> ReadTrials(const fs::path &path) {
  auto is = OpenIn(path);
  std::vector<Trial> trials;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (Trim(line).empty()) continue;
    std::istringstream ls(line);
    std::string label;
    Trial t;
    if (!(ls >> label >> t.utt_a >> t.utt_b) || (label != "0" && label != "1"))
      Fail(ErrorKind::kParse, path.string() + ":" + std::to_string(lineno) + ": bad trial line");
    t.target = label == "1";
    trials.push_back(std::move(t));
  }
  return trials;
}

}  // namespace anchorsv
