// core/include/anchorsv/digest.h

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

#ifndef ANCHORSV_DIGEST_H_
#define ANCHORSV_DIGEST_H_

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace anchorsv {

/// Incremental SHA-256; Hex() finalizes.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256 &) = delete;
  Sha256 &operator=(const Sha256 &) = delete;

  void Update(std::span<const unsigned char> bytes);
  void Update(std::string_view text);
  void Update(std::span<const double> values);
  std::string Hex();

 private:
  void *ctx_;
};

std::string Sha256Hex(std::string_view text);
std::string FileSha256(const std::filesystem::path &path);

}  // namespace anchorsv

#endif  // ANCHORSV_DIGEST_H_
