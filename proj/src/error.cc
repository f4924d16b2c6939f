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

#include "fairbench/error.h"

namespace fairbench {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedFile: return "MalformedFile";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kDanglingId: return "DanglingId";
    case ErrorCode::kInconsistentIdentityAttribute: return "InconsistentIdentityAttribute";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kUnknownId: return "UnknownId";
    case ErrorCode::kNotNormalized: return "NotNormalized";
    case ErrorCode::kKTooLarge: return "KTooLarge";
    case ErrorCode::kNonFiniteInput: return "NonFiniteInput";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNotEnoughPairs: return "NotEnoughPairs";
    case ErrorCode::kLabelMismatch: return "LabelMismatch";
    case ErrorCode::kUnlabeledSet: return "UnlabeledSet";
    case ErrorCode::kSingleClassInput: return "SingleClassInput";
    case ErrorCode::kTooFewSubgroups: return "TooFewSubgroups";
    case ErrorCode::kEmptyGroup: return "EmptyGroup";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kMissingPose: return "MissingPose";
    case ErrorCode::kNotEnoughCandidates: return "NotEnoughCandidates";
    case ErrorCode::kSingleLevel: return "SingleLevel";
    case ErrorCode::kEmptyCounts: return "EmptyCounts";
    case ErrorCode::kConstantTarget: return "ConstantTarget";
    case ErrorCode::kRankDeficient: return "RankDeficient";
    case ErrorCode::kZeroVariance: return "ZeroVariance";
    case ErrorCode::kSeparation: return "Separation";
    case ErrorCode::kNotConverged: return "NotConverged";
    case ErrorCode::kInvalidScenario: return "InvalidScenario";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace fairbench
