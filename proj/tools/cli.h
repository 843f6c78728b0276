// tools/cli.h

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

#ifndef ANCHORSV_TOOLS_CLI_H_
#define ANCHORSV_TOOLS_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace anchorsv::cli {

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitUsage = 2,
  kExitIo = 3,
  kExitNumeric = 4,
  kExitDegenerate = 5,
};

/// Runs one command line (without the program name), e.g.
/// {"train", "--stage", "1", "--data", "corpus", "--out", "run1"}.
/// Progress goes to out, diagnostics to err. Returns the exit code.
int Run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace anchorsv::cli

#endif  // ANCHORSV_TOOLS_CLI_H_
