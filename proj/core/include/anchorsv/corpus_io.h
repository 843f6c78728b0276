// core/include/anchorsv/corpus_io.h

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

#ifndef ANCHORSV_CORPUS_IO_H_
#define ANCHORSV_CORPUS_IO_H_

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "anchorsv/datagen.h"

namespace anchorsv {

// On-disk corpus layout (one directory per split):
//
//   dataset.txt   key = value header: format, split, n_speakers, dim, utterances
//   manifest.txt  one line per utterance: <id> <speaker> <condition> <storage>
//                 storage is "inline" (matrix lives in feats.txt) or a path,
//                 relative to the directory, of a single-matrix file
//   feats.txt     for each inline utterance: "<id> <rows> <cols>" followed by
//                 <rows> lines of <cols> values
//
// Values are written in shortest round-trip form, so a written corpus reads
// back bit-exactly.

void WriteDataset(const std::filesystem::path &dir, const Dataset &dataset);
Dataset ReadDataset(const std::filesystem::path &dir);

/// Trial list: one "1|0 <utt_a> <utt_b>" record per line.
void WriteTrials(const std::filesystem::path &path,
                 const std::vector<Trial> &trials);
std::vector<Trial> ReadTrials(const std::filesystem::path &path);

void WriteMatrix(std::ostream &os, const Mat64 &m);
Mat64 ReadMatrix(std::istream &is, std::size_t rows, std::size_t cols);

/// Shortest representation of x that parses back to the same double.
std::string FormatDouble(double x);
double ParseDouble(std::string_view text);

}  // namespace anchorsv

#endif  // ANCHORSV_CORPUS_IO_H_
