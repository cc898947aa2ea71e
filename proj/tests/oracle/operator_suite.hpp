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
#include <string>
#include <vector>

namespace ignis::oracle {

struct OperatorOutcome {
  std::string op;
  int executors = 0;
  int cases = 0;
  int failures = 0;
  std::string firstFailure;
};

struct OperatorSuiteOptions {
  int casesPerOp = 200;
  std::vector<int> executors{1, 2, 4};
  uint64_t seed = 20260415;
  /// Empty: every operator.
  std::vector<std::string> only;
  /// Scratch directory for the file sinks.
  std::string scratch = "/tmp/ignis-oracle";
};

/// The dataframe operators covered by the suite, in table order.
const std::vector<std::string>& operatorNames();

/// Runs randomized cases of every operator against sequential reference
/// implementations, one session per executor count.
std::vector<OperatorOutcome> runOperatorSuite(const OperatorSuiteOptions& options);

}  // namespace ignis::oracle
