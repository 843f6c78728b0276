// core/include/anchorsv/checkpoint.h

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

#ifndef ANCHORSV_CHECKPOINT_H_
#define ANCHORSV_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "anchorsv/model.h"

namespace anchorsv {

inline constexpr int kCheckpointVersion = 1;

// Text checkpoint:
//
//   anchorsv-checkpoint <version>
//   arch <input_dim> <hidden_dim> <embed_dim> <n_classes> <head_bias 0|1>
//   stage <1|2|joint>
//   seed <u64>
//   frozen <0|1>
//   blocks <count>
//   block <name> <rank> <dim>...
//   <values, one per line, shortest round-trip form>
//   ...
//   end
//
// Loading then saving reproduces the file byte for byte.
struct Checkpoint {
  BranchState branch;
  std::string stage = "1";
  std::uint64_t seed = 0;
};

void SaveCheckpoint(std::ostream &os, const Checkpoint &checkpoint);
Checkpoint LoadCheckpoint(std::istream &is);
void SaveCheckpoint(const std::filesystem::path &path, const Checkpoint &checkpoint);
Checkpoint LoadCheckpoint(const std::filesystem::path &path);

}  // namespace anchorsv

#endif  // ANCHORSV_CHECKPOINT_H_
