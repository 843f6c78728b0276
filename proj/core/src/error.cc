// core/src/error.cc

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

#include "anchorsv/error.h"

namespace anchorsv {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kZeroVector: return "ZeroVector";
    case ErrorKind::kNonFinite: return "NonFinite";
    case ErrorKind::kZeroPower: return "ZeroPower";
    case ErrorKind::kInfeasible: return "Infeasible";
    case ErrorKind::kShapeMismatch: return "ShapeMismatch";
    case ErrorKind::kAnchorNotFrozen: return "AnchorNotFrozen";
    case ErrorKind::kDegenerate: return "Degenerate";
    case ErrorKind::kUnknownId: return "UnknownId";
    case ErrorKind::kIo: return "Io";
    case ErrorKind::kParse: return "Parse";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kFrozenBranch: return "FrozenBranch";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string &what)
    : std::runtime_error(std::string(ErrorKindName(kind)) + ": " + what),
      kind_(kind) {}

NonFiniteStep::NonFiniteStep(long long step, const std::string &what)
    : Error(ErrorKind::kNonFinite,
            "step " + std::to_string(step) + ": " + what),
      step_(step) {}

void Fail(ErrorKind kind, const std::string &what) { throw Error(kind, what); }

}  // namespace anchorsv
