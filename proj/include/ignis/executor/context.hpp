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

#include <string>

#include "ignis/comms/communicator.hpp"
#include "ignis/error.hpp"
#include "ignis/lambda/lambda.hpp"
#include "ignis/properties.hpp"
#include "ignis/value.hpp"

namespace ignis::executor {

/// What a user function sees of its executor.
struct Context {
  std::string workerId;
  int executorRank = 0;
  int executorCount = 1;
  int threadId = 0;
  const Properties* props = nullptr;
  lambda::VarMap vars;
  /// The worker's live Base communicator. Collectives on it are only legal
  /// from call/voidCall/iterate functions, which run on the executor's
  /// command thread.
  comms::Communicator* comm = nullptr;

  const Value& var(const std::string& name) const {
    auto it = vars.find(name);
    if (it == vars.end()) fail(ErrorCode::kUnknownContextVariable, "context variable '" + name + "' is not set");
    return it->second;
  }

  comms::Communicator& base() const {
    if (!comm) fail(ErrorCode::kPrecondition, "no base communicator in this context");
    return *comm;
  }
};

}  // namespace ignis::executor
