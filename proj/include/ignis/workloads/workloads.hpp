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

#include "ignis/value.hpp"

namespace ignis::workloads {

/// Names accepted by runWorkload.
const std::vector<std::string>& workloadNames();

struct WorkloadSpec {
  std::string name;
  uint64_t seed = 1;
  /// Lines (wordcount, terasort, minebench-sim), points (kmeans) or vertices
  /// (pagerank, transitiveClosure). 0 selects the default.
  int64_t size = 0;
  /// Graph edges; 0 selects the default for the vertex count.
  int64_t edges = 0;
  int64_t iterations = 10;
  /// K-Means cluster count and point dimension.
  int64_t k = 4;
  int64_t dim = 2;
  /// Minebench hash rounds per block.
  int64_t rounds = 1000;
  /// textFile minimum partitions; 0 uses two per executor.
  int64_t partitions = 0;
  /// wordcount: count with the wordcountMerge call instead of reduceByKey.
  bool hybrid = false;
  /// kmeans: resident iteration instead of one job per iteration.
  bool resident = false;
  /// Directory for generated input and output files; created if missing.
  std::string workDir;
};

struct WorkloadMetrics {
  /// Task executions recorded by the scheduler during the run.
  int64_t taskExecutions = 0;
  /// Sums over every executor of the workers used.
  int64_t stages = 0;
  int64_t partitionPasses = 0;
  int64_t exchangeMessages = 0;
  int64_t exchangeBytes = 0;
  int64_t dataFrames = 0;
  int64_t dataBytes = 0;
  double seconds = 0;
};

struct WorkloadResult {
  std::string name;
  int executors = 0;
  std::string inputPath;
  /// Directory written by saveAsTextFile, empty when nothing is saved.
  std::string outputPath;
  /// wordcount: Pair(Str word, I64 count) sorted by word.
  /// pagerank: Pair(I64 vertex, F64 rank) sorted by vertex.
  /// transitiveClosure: Pair(I64 src, I64 dst) sorted.
  /// kmeans: List[F64] centroids in cluster order.
  std::vector<Value> rows;
  /// Rounds run by iterative workloads.
  int64_t iterations = 0;
  /// terasort: elements held by each executor after the sort.
  std::vector<int64_t> loadPerExecutor;
  /// Resident kmeans: executor pids after every iteration.
  std::vector<std::vector<int64_t>> pids;
  WorkloadMetrics metrics;
};

/// Runs one workload on a fresh cluster of `executors` executors inside the
/// started session. Input is generated into spec.workDir from spec.seed.
WorkloadResult runWorkload(const WorkloadSpec& spec, int executors);

// Deterministic input generators. Equal arguments give identical files.

/// Lines of whitespace-separated words with a skewed word frequency.
void generateText(const std::string& path, uint64_t seed, int64_t lines);
/// Records of a 10 character printable key, a row number and a payload.
void generateSortRecords(const std::string& path, uint64_t seed, int64_t lines);
/// Points around k seeded centers, one "x y ..." line each.
void generatePoints(const std::string& path, uint64_t seed, int64_t points, int64_t k, int64_t dim);
/// Distinct "src dst" edges without self loops over vertices [0, vertices).
/// With `everyVertexHasOutEdge` each vertex gets at least one out-edge.
void generateGraph(const std::string& path, uint64_t seed, int64_t vertices, int64_t edges,
                   bool everyVertexHasOutEdge);
/// Lines of hex transaction ids standing in for block proposals.
void generateBlocks(const std::string& path, uint64_t seed, int64_t blocks);

/// Reads the lines of a file, or of the sorted files of a directory.
std::vector<std::string> readLines(const std::string& path);

}  // namespace ignis::workloads
