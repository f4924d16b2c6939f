// Copyright (c) 2026 The fairbench Authors. All Rights Reserved
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FAIRBENCH_ERROR_H_
#define FAIRBENCH_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace fairbench {

// Every failure surfaced by the library carries one of these codes. The CLI
// maps them one-to-one onto the "code" field of its error JSON.
enum class ErrorCode {
  kMalformedFile,
  kDimensionMismatch,
  kDanglingId,
  kInconsistentIdentityAttribute,
  kZeroVector,
  kUnknownId,
  kNotNormalized,
  kKTooLarge,
  kNonFiniteInput,
  kInvalidArgument,
  kNotEnoughPairs,
  kLabelMismatch,
  kUnlabeledSet,
  kSingleClassInput,
  kTooFewSubgroups,
  kEmptyGroup,
  kTooFewSamples,
  kMissingPose,
  kNotEnoughCandidates,
  kSingleLevel,
  kEmptyCounts,
  kConstantTarget,
  kRankDeficient,
  kZeroVariance,
  kSeparation,
  kNotConverged,
  kInvalidScenario,
  kInvalidConfig,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fairbench

#endif  // FAIRBENCH_ERROR_H_
