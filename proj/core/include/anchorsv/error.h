// core/include/anchorsv/error.h

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

#ifndef ANCHORSV_ERROR_H_
#define ANCHORSV_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace anchorsv {

enum class ErrorKind {
  kZeroVector,
  kNonFinite,
  kZeroPower,
  kInfeasible,
  kShapeMismatch,
  kAnchorNotFrozen,
  kDegenerate,
  kUnknownId,
  kIo,
  kParse,
  kInvalidArgument,
  kFrozenBranch,
};

std::string_view ErrorKindName(ErrorKind kind);

/// Every failure raised by the library carries a kind so callers (the CLI in
/// particular) can map it to a stable exit code without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &what);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised by the trainers when a loss or gradient stops being finite.
class NonFiniteStep : public Error {
 public:
  NonFiniteStep(long long step, const std::string &what);
  long long step() const noexcept { return step_; }

 private:
  long long step_;
};

[[noreturn]] void Fail(ErrorKind kind, const std::string &what);

}  // namespace anchorsv

#endif  // ANCHORSV_ERROR_H_
