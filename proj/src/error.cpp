/* Copyright 2026 The Explore Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "explore/error.hpp"

namespace explore {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kCorruptFile: return "CorruptFile";
    case ErrorCode::kUnknownUser: return "UnknownUser";
    case ErrorCode::kUnknownSong: return "UnknownSong";
    case ErrorCode::kInsufficientOverlap: return "InsufficientOverlap";
    case ErrorCode::kEmptyNeighborhood: return "EmptyNeighborhood";
    case ErrorCode::kNoRatingSupport: return "NoRatingSupport";
    case ErrorCode::kDivergenceDetected: return "DivergenceDetected";
    case ErrorCode::kDegenerateDesign: return "DegenerateDesign";
    case ErrorCode::kNoRepresentatives: return "NoRepresentatives";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kNoUsers: return "NoUsers";
    case ErrorCode::kNegativeGain: return "NegativeGain";
    case ErrorCode::kEmptyTest: return "EmptyTest";
    case ErrorCode::kConfigMismatch: return "ConfigMismatch";
    case ErrorCode::kRebuildInProgress: return "RebuildInProgress";
    case ErrorCode::kUnavailable: return "Unavailable";
  }
  return "Unknown";
}

}  // namespace explore
