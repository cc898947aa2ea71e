// Copyright 2026 The Ignis Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ignis {

/// Error categories shared by every module. The numeric values travel on the
/// wire (executor replies, RPC responses) so they must never be renumbered.
enum class ErrorCode : int32_t {
  kInternal = 1,
  kMalformedEncoding = 2,
  kMalformedContainer = 3,
  kIo = 4,
  kConnectTimeout = 5,
  kPeerLost = 6,
  kStaleEpoch = 7,
  kRootMismatch = 8,
  kCollectiveMismatch = 9,
  kCollectiveBusy = 10,
  kPrecondition = 11,
  kSameWorker = 12,
  kUnknownDependency = 13,
  kRecoveryExhausted = 14,
  kNonConvergence = 15,
  kUserFunction = 16,
  kType = 17,
  kEmptyDataFrame = 18,
  kResultTooLarge = 19,
  kUnknownFunction = 20,
  kArityMismatch = 21,
  kParse = 22,
  kDivisionByZero = 23,
  kUnknownContextVariable = 24,
  kInvalidSession = 25,
  kDoubleStart = 26,
  kResource = 27,
  kBindFailure = 28,
  kProtocol = 29,
  kUsage = 30,
  kTimeout = 31,
};

std::string_view errorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, int32_t rank = -1)
      : std::runtime_error(message), code_(code), rank_(rank) {}

  ErrorCode code() const noexcept { return code_; }

  /// Rank of the offending member for communication and op-failure errors,
  /// -1 when not applicable.
  int32_t rank() const noexcept { return rank_; }

 private:
  ErrorCode code_;
  int32_t rank_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message, int32_t rank = -1) {
  throw Error(code, message, rank);
}

}  // namespace ignis
