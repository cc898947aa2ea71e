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

#include <set>

#include "oracle/collective_suite.hpp"

namespace ignis::oracle {
namespace {

TEST(CollectiveSuiteTest, EveryCollectiveMatchesItsOracle) {
  CollectiveSuiteOptions options;
  options.rounds = 10;
  auto outcomes = runCollectiveSuite(options);
  std::set<int> sizes;
  for (const auto& o : outcomes) {
    sizes.insert(o.size);
    EXPECT_EQ(o.failures, 0) << o.check << " p=" << o.size << ": " << o.firstFailure;
    EXPECT_GT(o.rounds, 0) << o.check << " p=" << o.size;
  }
  EXPECT_EQ(sizes, (std::set<int>{1, 2, 4, 8}));
}

}  // namespace
}  // namespace ignis::oracle
