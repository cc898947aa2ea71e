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

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "ignis/error.hpp"
#include "ignis/workloads/workloads.hpp"
#include "oracle/workload_oracles.hpp"
#include "support/session.hpp"

namespace ignis {
namespace {

using testing::Session;
using testing::scratchDir;
using workloads::runWorkload;
using workloads::WorkloadResult;
using workloads::WorkloadSpec;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

WorkloadSpec spec(const std::string& name, int64_t size, const std::string& dir) {
  WorkloadSpec s;
  s.name = name;
  s.seed = 7;
  s.size = size;
  s.workDir = scratchDir(dir);
  return s;
}

TEST(GeneratorTest, SameSeedSameBytes) {
  std::string dir = scratchDir("gen");
  auto twice = [&](const std::string& name, auto gen) {
    gen(dir + "/" + name + "-a", 5);
    gen(dir + "/" + name + "-b", 5);
    gen(dir + "/" + name + "-c", 6);
    EXPECT_EQ(slurp(dir + "/" + name + "-a"), slurp(dir + "/" + name + "-b")) << name;
    EXPECT_NE(slurp(dir + "/" + name + "-a"), slurp(dir + "/" + name + "-c")) << name;
    EXPECT_FALSE(slurp(dir + "/" + name + "-a").empty()) << name;
  };
  twice("text", [](const std::string& p, uint64_t s) { workloads::generateText(p, s, 50); });
  twice("sort", [](const std::string& p, uint64_t s) { workloads::generateSortRecords(p, s, 50); });
  twice("points", [](const std::string& p, uint64_t s) { workloads::generatePoints(p, s, 50, 3, 2); });
  twice("graph", [](const std::string& p, uint64_t s) { workloads::generateGraph(p, s, 20, 40, true); });
  twice("blocks", [](const std::string& p, uint64_t s) { workloads::generateBlocks(p, s, 50); });
}

TEST(GeneratorTest, GraphShape) {
  std::string dir = scratchDir("graph");
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    bool cover = seed % 2 == 0;
    std::string path = dir + "/g" + std::to_string(seed);
    workloads::generateGraph(path, seed, 30, 60, cover);
    auto edges = oracle::parseEdges(workloads::readLines(path));
    ASSERT_EQ(edges.size(), 60u);
    std::set<oracle::Edge> distinct(edges.begin(), edges.end());
    EXPECT_EQ(distinct.size(), edges.size());
    std::set<int64_t> sources;
    for (const auto& [a, b] : edges) {
      EXPECT_NE(a, b);
      EXPECT_GE(a, 0);
      EXPECT_LT(b, 30);
      sources.insert(a);
    }
    if (cover) EXPECT_EQ(sources.size(), 30u);
  }
  EXPECT_THROW(workloads::generateGraph(dir + "/x", 1, 3, 7, false), Error);
}

TEST(GeneratorTest, SortRecordsHaveTenCharacterKeys) {
  std::string path = scratchDir("records") + "/r";
  workloads::generateSortRecords(path, 3, 200);
  auto lines = workloads::readLines(path);
  ASSERT_EQ(lines.size(), 200u);
  for (const std::string& l : lines) {
    ASSERT_GT(l.size(), 11u);
    EXPECT_EQ(l[10], ' ');
    for (int i = 0; i < 10; ++i) EXPECT_TRUE(l[i] > ' ' && l[i] <= '~');
  }
}

TEST(OracleTest, Reachability) {
  auto r = oracle::reachability({{0, 1}, {1, 2}, {2, 0}, {3, 0}});
  std::set<oracle::Edge> expected;
  for (int64_t a = 0; a < 3; ++a)
    for (int64_t b = 0; b < 3; ++b) expected.emplace(a, b);
  for (int64_t b = 0; b < 3; ++b) expected.emplace(3, b);
  EXPECT_EQ(r, expected);
}

TEST(OracleTest, PagerankOfSymmetricCycle) {
  auto r = oracle::pagerank({{0, 1}, {1, 2}, {2, 0}}, 3, 10, 0.85);
  for (double x : r) EXPECT_NEAR(x, 1.0 / 3.0, 1e-15);
  auto star = oracle::pagerank({{0, 1}, {1, 0}, {2, 0}}, 3, 50, 0.85);
  EXPECT_NEAR(star[2], 0.05, 1e-12);
  EXPECT_NEAR(star[0] + star[1] + star[2], 1.0, 1e-12);
}

TEST(OracleTest, LloydSeparatesObviousClusters) {
  auto c = oracle::lloyd({{0, 0}, {10, 10}, {0, 1}, {10, 11}}, 2, 3);
  EXPECT_DOUBLE_EQ(c[0][1], 0.5);
  EXPECT_DOUBLE_EQ(c[1][1], 10.5);
}

class WorkloadTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { session_ = new Session(1); }
  static void TearDownTestSuite() {
    delete session_;
    session_ = nullptr;
  }
  static Session* session_;
};
Session* WorkloadTest::session_ = nullptr;

TEST_F(WorkloadTest, EveryWorkloadMatchesItsOracle) {
  std::map<std::string, int64_t> sizes{{"wordcount", 3000}, {"terasort", 20000}, {"kmeans", 1500},
                                       {"pagerank", 100},   {"transitiveClosure", 0}, {"minebench-sim", 2000}};
  for (const std::string& name : workloads::workloadNames()) {
    for (int p : {1, 2, 4}) {
      WorkloadSpec s = spec(name, sizes.at(name), name + std::to_string(p));
      WorkloadResult r = runWorkload(s, p);
      EXPECT_EQ(oracle::checkWorkload(s, r), "") << name << " p=" << p;
      EXPECT_GT(r.metrics.taskExecutions, 0) << name;
      EXPECT_GT(r.metrics.stages, 0) << name;
      EXPECT_GT(r.metrics.partitionPasses, 0) << name;
      if (p > 1 && name != "minebench-sim") EXPECT_GT(r.metrics.exchangeBytes, 0) << name;
    }
  }
}

TEST_F(WorkloadTest, ResultsDoNotDependOnExecutorCount) {
  for (const std::string& name : {"wordcount", "transitiveClosure", "pagerank"}) {
    std::vector<Value> first;
    for (int p : {1, 2, 4}) {
      WorkloadSpec s = spec(name, name == std::string("wordcount") ? 2000 : 0, "indep" + std::to_string(p));
      WorkloadResult r = runWorkload(s, p);
      if (p == 1) {
        first = r.rows;
        ASSERT_FALSE(first.empty());
      } else {
        EXPECT_EQ(r.rows, first) << name << " p=" << p;
      }
    }
  }
}

TEST_F(WorkloadTest, KMeansAcrossExecutorCounts) {
  std::vector<Value> first;
  for (int p : {1, 2, 4}) {
    WorkloadResult r = runWorkload(spec("kmeans", 1000, "km" + std::to_string(p)), p);
    if (p == 1) {
      first = r.rows;
      continue;
    }
    for (size_t c = 0; c < first.size(); ++c)
      for (size_t d = 0; d < first[c].asList().size(); ++d)
        EXPECT_NEAR(r.rows[c].asList()[d].asF64(), first[c].asList()[d].asF64(), 1e-9);
  }
}

TEST_F(WorkloadTest, HybridWordcountEqualsOperatorWordcount) {
  for (int p : {1, 3}) {
    WorkloadSpec s = spec("wordcount", 2500, "hybrid" + std::to_string(p));
    WorkloadResult pure = runWorkload(s, p);
    s.hybrid = true;
    WorkloadResult hybrid = runWorkload(s, p);
    EXPECT_EQ(hybrid.rows, pure.rows);
    EXPECT_EQ(oracle::checkWorkload(s, hybrid), "");
  }
}

TEST_F(WorkloadTest, ResidentKMeansKeepsExecutorsAndMatchesLloyd) {
  WorkloadSpec s = spec("kmeans", 1200, "resident");
  s.resident = true;
  s.partitions = 3;
  WorkloadResult r = runWorkload(s, 4);
  EXPECT_EQ(oracle::checkWorkload(s, r), "");
  ASSERT_EQ(r.pids.size(), 10u);
  for (const auto& pids : r.pids) EXPECT_EQ(pids, r.pids.front());
  EXPECT_EQ(r.pids.front().size(), 4u);
}

TEST_F(WorkloadTest, TerasortBalancesExecutors) {
  WorkloadResult r = runWorkload(spec("terasort", 40000, "balance"), 4);
  ASSERT_EQ(r.loadPerExecutor.size(), 4u);
  for (int64_t load : r.loadPerExecutor) EXPECT_LE(load, 2 * 40000 / 4);
}

TEST_F(WorkloadTest, TransitiveClosureOfDefaultGraphIsSmall) {
  WorkloadSpec s = spec("transitiveClosure", 0, "tcdefault");
  WorkloadResult r = runWorkload(s, 2);
  auto edges = oracle::parseEdges(workloads::readLines(r.inputPath));
  EXPECT_EQ(edges.size(), 200u);
  std::set<int64_t> vertices;
  for (const auto& [a, b] : edges) {
    vertices.insert(a);
    vertices.insert(b);
  }
  EXPECT_LE(vertices.size(), 75u);
  EXPECT_LE(*vertices.rbegin(), 74);
  EXPECT_GE(r.iterations, 2);
}

TEST_F(WorkloadTest, OraclesRejectCorruptedResults) {
  WorkloadSpec wc = spec("wordcount", 500, "bad-wc");
  WorkloadResult r = runWorkload(wc, 2);
  r.rows[3] = Value::pair(r.rows[3].first(), Value::i64(r.rows[3].second().asI64() + 1));
  EXPECT_NE(oracle::checkWorkload(wc, r), "");

  WorkloadSpec tc = spec("transitiveClosure", 0, "bad-tc");
  r = runWorkload(tc, 2);
  r.rows.pop_back();
  EXPECT_NE(oracle::checkWorkload(tc, r), "");

  WorkloadSpec pr = spec("pagerank", 50, "bad-pr");
  r = runWorkload(pr, 2);
  r.rows[7] = Value::pair(r.rows[7].first(), Value::f64(r.rows[7].second().asF64() + 2e-6));
  EXPECT_NE(oracle::checkWorkload(pr, r), "");

  WorkloadSpec km = spec("kmeans", 300, "bad-km");
  r = runWorkload(km, 2);
  ValueList c = r.rows[1].asList();
  c[0] = Value::f64(c[0].asF64() * (1 + 1e-8));
  r.rows[1] = Value::list(std::move(c));
  EXPECT_NE(oracle::checkWorkload(km, r), "");

  WorkloadSpec ts = spec("terasort", 1000, "bad-ts");
  r = runWorkload(ts, 4);
  r.loadPerExecutor = {1000, 0, 0, 0};
  EXPECT_NE(oracle::checkWorkload(ts, r), "");
}

TEST_F(WorkloadTest, UnknownWorkload) {
  try {
    runWorkload(spec("nope", 1, "nope"), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUsage);
  }
}

}  // namespace
}  // namespace ignis
