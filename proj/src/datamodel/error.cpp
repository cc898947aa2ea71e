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

#include "ignis/error.hpp"

namespace ignis {

std::string_view errorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInternal: return "internal";
    case ErrorCode::kMalformedEncoding: return "malformed-encoding";
    case ErrorCode::kMalformedContainer: return "malformed-container";
    case ErrorCode::kIo: return "io-error";
    case ErrorCode::kConnectTimeout: return "connect-timeout";
    case ErrorCode::kPeerLost: return "peer-lost";
    case ErrorCode::kStaleEpoch: return "stale-epoch";
    case ErrorCode::kRootMismatch: return "root-mismatch";
    case ErrorCode::kCollectiveMismatch: return "collective-mismatch";
    case ErrorCode::kCollectiveBusy: return "collective-busy";
    case ErrorCode::kPrecondition: return "precondition";
    case ErrorCode::kSameWorker: return "same-worker";
    case ErrorCode::kUnknownDependency: return "unknown-dependency";
    case ErrorCode::kRecoveryExhausted: return "recovery-exhausted";
    case ErrorCode::kNonConvergence: return "non-convergence";
    case ErrorCode::kUserFunction: return "user-function";
    case ErrorCode::kType: return "type-error";
    case ErrorCode::kEmptyDataFrame: return "empty-dataframe";
    case ErrorCode::kResultTooLarge: return "result-too-large";
    case ErrorCode::kUnknownFunction: return "unknown-function";
    case ErrorCode::kArityMismatch: return "arity-mismatch";
    case ErrorCode::kParse: return "parse-error";
    case ErrorCode::kDivisionByZero: return "division-by-zero";
    case ErrorCode::kUnknownContextVariable: return "unknown-context-variable";
    case ErrorCode::kInvalidSession: return "invalid-session";
    case ErrorCode::kDoubleStart: return "double-start";
    case ErrorCode::kResource: return "resource";
    case ErrorCode::kBindFailure: return "bind-failure";
    case ErrorCode::kProtocol: return "protocol";
    case ErrorCode::kUsage: return "usage";
    case ErrorCode::kTimeout: return "timeout";
  }
  return "unknown";
}

}  // namespace ignis
