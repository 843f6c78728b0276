// tests/corpus_io_test.cc

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

#include <gtest/gtest.h>

#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "anchorsv/corpus_io.h"
#include "anchorsv/datagen.h"
#include "anchorsv/digest.h"
#include "test_util.h"

namespace anchorsv {
namespace {

using testing::TempDir;

bool BitEqual(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

void ExpectSameDataset(const Dataset &a, const Dataset &b) {
  EXPECT_EQ(a.n_speakers, b.n_speakers);
  EXPECT_EQ(a.split, b.split);
  EXPECT_EQ(a.dim, b.dim);
  ASSERT_EQ(a.utterances.size(), b.utterances.size());
  for (std::size_t i = 0; i < a.utterances.size(); ++i) {
    const Utterance &x = a.utterances[i], &y = b.utterances[i];
    EXPECT_EQ(x.id, y.id);
    EXPECT_EQ(x.speaker, y.speaker);
    EXPECT_EQ(x.condition, y.condition);
    ASSERT_TRUE(x.frames.SameShape(y.frames));
    for (std::size_t k = 0; k < x.frames.size(); ++k)
      ASSERT_TRUE(BitEqual(x.frames.flat()[k], y.frames.flat()[k])) << x.id << " entry " << k;
  }
}

TEST(FormatDoubleTest, RoundTripsBitExactly) {
  Rng rng(4);
  std::vector<double> values = {0.0, -0.0, 1.0, -1.5, 1e-300, 5e-324, 1.7976931348623157e308,
                                0.1, 1.0 / 3.0};
  for (int i = 0; i < 1000; ++i) values.push_back(rng.Gaussian() * std::exp(rng.Uniform(-50, 50)));
  for (double v : values) EXPECT_TRUE(BitEqual(ParseDouble(FormatDouble(v)), v)) << v;
  EXPECT_EQ(FormatDouble(0.5), "0.5");
  EXPECT_ERROR_KIND(ParseDouble("1.0x"), ErrorKind::kParse);
  EXPECT_ERROR_KIND(ParseDouble(""), ErrorKind::kParse);
}

TEST(MatrixIoTest, RoundTrip) {
  Rng rng(8);
  Mat64 m = testing::RandomMat(rng, 3, 5);
  std::stringstream ss;
  WriteMatrix(ss, m);
  EXPECT_EQ(ReadMatrix(ss, 3, 5), m);
  std::istringstream bad("1 2\n3\n");
  EXPECT_ERROR_KIND(ReadMatrix(bad, 2, 2), ErrorKind::kParse);
}

TEST(DatasetIoTest, InlineRoundTripIsBitExact) {
  TempDir dir;
  Dataset ds = testing::TinyCorpus(3, 3, 2, 5, 4);
  ds.utterances[1] = MakeNoisy(ds.utterances[1], 17, NoiseKind::kTonal, 7.5);
  ds.split = Split::kTest;
  WriteDataset(dir.path(), ds);
  Dataset back = ReadDataset(dir.path());
  ExpectSameDataset(ds, back);

  TempDir again;
  WriteDataset(again.path(), back);
  for (const char *f : {"dataset.txt", "manifest.txt", "feats.txt"})
    EXPECT_EQ(FileSha256(dir / f), FileSha256(again / f)) << f;
}

TEST(DatasetIoTest, PathStorage) {
  TempDir dir;
  Dataset ds = testing::TinyCorpus(5, 2, 1, 3, 2);
  {
    std::ofstream h(dir / "dataset.txt");
    h << "format = anchorsv-corpus-1\nsplit = train\nn_speakers = 2\ndim = 2\nutterances = 2\n";
    std::ofstream m(dir / "manifest.txt");
    for (const Utterance &u : ds.utterances) {
      m << u.id << ' ' << u.speaker << " clean blobs/" << u.id << ".txt\n";
      std::filesystem::create_directories(dir / "blobs");
      std::ofstream b(dir / ("blobs/" + u.id + ".txt"));
      b << u.id << ' ' << u.frames.rows() << ' ' << u.frames.cols() << '\n';
      WriteMatrix(b, u.frames);
    }
  }
  ExpectSameDataset(ds, ReadDataset(dir.path()));
}

TEST(DatasetIoTest, Errors) {
  TempDir dir;
  EXPECT_ERROR_KIND(ReadDataset(dir / "missing"), ErrorKind::kIo);
  Dataset ds = testing::TinyCorpus(5, 2, 1, 3, 2);
  WriteDataset(dir.path(), ds);
  {
    std::ofstream h(dir / "dataset.txt");
    h << "format = anchorsv-corpus-1\nsplit = train\nn_speakers = 2\ndim = 2\nutterances = 5\n";
  }
  EXPECT_ERROR_KIND(ReadDataset(dir.path()), ErrorKind::kParse);
  {
    std::ofstream h(dir / "dataset.txt");
    h << "format = something-else\n";
  }
  EXPECT_ERROR_KIND(ReadDataset(dir.path()), ErrorKind::kParse);
  {
    std::ofstream h(dir / "dataset.txt");
    h << "format = anchorsv-corpus-1\nn_speakers = two\n";
  }
  EXPECT_ERROR_KIND(ReadDataset(dir.path()), ErrorKind::kParse);
}

TEST(TrialsIoTest, RoundTripAndFormat) {
  TempDir dir;
  std::vector<Trial> trials = {{"a", "b", true}, {"c", "d", false}};
  WriteTrials(dir / "trials.txt", trials);
  EXPECT_EQ(ReadTrials(dir / "trials.txt"), trials);
  std::ifstream is(dir / "trials.txt");
  std::string text((std::istreambuf_iterator<char>(is)), {});
  EXPECT_EQ(text, "1 a b\n0 c d\n");

  std::ofstream(dir / "bad.txt") << "2 a b\n";
  EXPECT_ERROR_KIND(ReadTrials(dir / "bad.txt"), ErrorKind::kParse);
  std::ofstream(dir / "short.txt") << "1 a\n";
  EXPECT_ERROR_KIND(ReadTrials(dir / "short.txt"), ErrorKind::kParse);
  EXPECT_ERROR_KIND(ReadTrials(dir / "none.txt"), ErrorKind::kIo);
}

}  // namespace
}  // namespace anchorsv
