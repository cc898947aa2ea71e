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

#include <gtest/gtest.h>

#include <cstdlib>

#include "oracle/operator_suite.hpp"
#include "support/session.hpp"

namespace ignis::oracle {
namespace {

int casesFromEnv() {
  const char* v = std::getenv("IGNIS_ORACLE_CASES");
  return v ? std::atoi(v) : 25;
}

TEST(OperatorOracleTest, EveryOperatorMatchesItsReference) {
  OperatorSuiteOptions options;
  options.casesPerOp = casesFromEnv();
  options.scratch = testing::scratchDir("oracle");
  auto outcomes = runOperatorSuite(options);
  EXPECT_EQ(outcomes.size(), operatorNames().size() * options.executors.size());
  for (const auto& o : outcomes) {
    EXPECT_EQ(o.failures, 0) << o.op << " p=" << o.executors << " " << o.firstFailure;
    EXPECT_EQ(o.cases, options.casesPerOp);
  }
}

}  // namespace
}  // namespace ignis::oracle
