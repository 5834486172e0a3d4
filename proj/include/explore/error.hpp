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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace explore {

// Kept numerically in sync with explore_status in explore.h.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kIo = 2,
  kMalformedLine = 3,
  kEmptyInput = 4,
  kVersionMismatch = 5,
  kCorruptFile = 6,
  kUnknownUser = 7,
  kUnknownSong = 8,
  kInsufficientOverlap = 9,
  kEmptyNeighborhood = 10,
  kNoRatingSupport = 11,
  kDivergenceDetected = 12,
  kDegenerateDesign = 13,
  kNoRepresentatives = 14,
  kLengthMismatch = 15,
  kNoUsers = 16,
  kNegativeGain = 17,
  kEmptyTest = 18,
  kConfigMismatch = 19,
  kRebuildInProgress = 20,
  kUnavailable = 21,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace explore
