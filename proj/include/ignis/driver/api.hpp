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
#include <optional>
#include <string>
#include <vector>

#include "ignis/properties.hpp"
#include "ignis/scheduler/backend.hpp"
#include "ignis/storage/partition.hpp"
#include "ignis/value.hpp"

namespace ignis::driver {

/// Engine configuration; unset keys fall back to the engine defaults.
class IProperties {
 public:
  IProperties() = default;
  explicit IProperties(Properties props) : props_(std::move(props)) {}

  IProperties& set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const { return props_.get(key); }
  bool contains(const std::string& key) const { return props_.contains(key); }
  void erase(const std::string& key) { props_.erase(key); }

  /// Reads a `key=value` file.
  static IProperties load(const std::string& path);

  const Properties& raw() const { return props_; }

 private:
  Properties props_;
};

/// A function shipped to the executors: a registered function name or a
/// text lambda such as "lambda a, b: a + b", plus captured parameters that
/// the function reads from its context (`$name` in lambdas).
class ISource {
 public:
  /// Lambda text is parsed here, so syntax errors surface before any job
  /// runs (kParse).
  ISource(const std::string& nameOrLambda);  // NOLINT(google-explicit-constructor)
  ISource(const char* nameOrLambda) : ISource(std::string(nameOrLambda)) {}  // NOLINT

  ISource& addParam(const std::string& name, Value value);

  bool isLambda() const { return lambda_; }
  const std::string& text() const { return text_; }
  /// Pair(target, List[Pair(Str name, value)]) where target is Str(name) or
  /// the lambda wire form.
  Value toValue() const;
  static ISource fromValue(const Value& v);

 private:
  ISource() = default;

  std::string text_;
  bool lambda_ = false;
  Value target_;
  std::vector<std::pair<std::string, Value>> params_;
};

/// Session lifecycle. Every other API object requires a started session and
/// becomes invalid once the session stops.
class Ignis {
 public:
  /// kDoubleStart if already started. When IGNIS_SUBMIT_PROPERTIES names a
  /// properties file (set by ignis-submit), its entries replace the engine
  /// defaults; `props` then override them, except `ignis.driver.*` keys fixed
  /// at submission.
  static void start(const IProperties& props = IProperties());
  /// Terminates every executor process. Idempotent.
  static void stop();
  static bool started();

  /// kInvalidSession when stopped.
  static scheduler::Backend& backend();
  /// Incremented by every start; handles remember the one they were made in.
  static uint64_t generation();
};

class IWorker;
class IDataFrame;

class ICluster {
 public:
  ICluster();
  explicit ICluster(const IProperties& props);

  const std::string& id() const { return id_; }

 private:
  friend class IWorker;
  std::string id_;
  uint64_t generation_ = 0;
};

struct IterationResult {
  Value state;
  int64_t iterations = 0;
  bool converged = false;
  /// Executor process ids after every iteration, rank order.
  std::vector<std::vector<int64_t>> pids;
};

class IDataFrame {
 public:
  int64_t id() const { return id_; }
  const std::string& workerId() const { return worker_; }

  // Element-wise transforms.
  IDataFrame map(const ISource& fn) const;
  IDataFrame filter(const ISource& fn) const;
  IDataFrame flatmap(const ISource& fn) const;
  IDataFrame keyBy(const ISource& fn) const;
  IDataFrame mapPartitions(const ISource& fn) const;
  IDataFrame keys() const;
  IDataFrame values() const;
  IDataFrame mapValues(const ISource& fn) const;

  // Grouping and sorting.
  IDataFrame groupBy(const ISource& fn, int64_t partitions = 0) const;
  IDataFrame groupByKey(int64_t partitions = 0) const;
  IDataFrame sort(bool ascending = true) const;
  IDataFrame sortBy(const ISource& fn, bool ascending = true) const;
  IDataFrame sortByKey(bool ascending = true) const;

  // Reductions.
  Value reduce(const ISource& fn) const;
  Value treeReduce(const ISource& fn) const;
  Value aggregate(const Value& zero, const ISource& seqOp, const ISource& combOp) const;
  Value treeAggregate(const Value& zero, const ISource& seqOp, const ISource& combOp) const;
  Value fold(const Value& zero, const ISource& fn) const;
  IDataFrame reduceByKey(const ISource& fn, int64_t partitions = 0) const;
  IDataFrame aggregateByKey(const Value& zero, const ISource& seqOp, const ISource& combOp,
                            int64_t partitions = 0) const;

  // Retrieval and output.
  std::vector<Value> collect() const;
  std::vector<Value> top(int64_t n) const;
  std::vector<Value> top(int64_t n, const ISource& key) const;
  std::vector<Value> take(int64_t n) const;
  std::string saveAsObjectFile(const std::string& path) const;
  std::string saveAsTextFile(const std::string& path) const;
  std::string saveAsJsonFile(const std::string& path) const;

  // Set operations.
  IDataFrame unionDataFrame(const IDataFrame& other) const;
  IDataFrame join(const IDataFrame& other, int64_t partitions = 0) const;
  IDataFrame distinct(int64_t partitions = 0) const;

  // Statistics.
  IDataFrame sample(bool withReplacement, double fraction, int64_t seed) const;
  /// `fractions` is a List of Pair(key, fraction); keys not listed are dropped.
  IDataFrame sampleByKey(bool withReplacement, const Value& fractions, int64_t seed) const;
  std::vector<Value> takeSample(bool withReplacement, int64_t n, int64_t seed) const;
  int64_t count() const;
  Value max() const;
  Value max(const ISource& key) const;
  Value min() const;
  Value min(const ISource& key) const;
  IDataFrame countByKey() const;
  IDataFrame countByValue() const;

  // Partitioning.
  IDataFrame repartition(int64_t partitions) const;
  IDataFrame partitionBy(int64_t partitions) const;
  IDataFrame partitionBy(int64_t partitions, const ISource& fn) const;

  // Persistence.
  IDataFrame& persist(const storage::StoreKind& tier);
  IDataFrame& cache();
  IDataFrame& unpersist();
  IDataFrame& uncache();

  /// Resident loop: every executor runs the registered iteration function on
  /// its own elements until it reports convergence or `maxIterations` rounds
  /// ran (negative: up to ignis.iterate.max, else kNonConvergence). The
  /// resulting dataframe has the same elements.
  IDataFrame iterate(const ISource& fn, const Value& state, int64_t maxIterations = -1) const;
  /// Runs the iteration if needed and returns its outcome.
  IterationResult iterationResult() const;

 private:
  friend class IWorker;
  IDataFrame(int64_t id, std::string worker, uint64_t generation)
      : id_(id), worker_(std::move(worker)), generation_(generation) {}

  scheduler::Backend& backend() const;
  IDataFrame transform(const std::string& op, executor::Args params, std::vector<int64_t> extraDeps = {}) const;
  Value action(const std::string& op, executor::Args params) const;

  int64_t id_ = 0;
  std::string worker_;
  uint64_t generation_ = 0;
};

class IWorker {
 public:
  /// Spawns the worker's executors. The namespace selects the preloaded
  /// function bundle ("std" or "workloads").
  explicit IWorker(const ICluster& cluster, const std::string& registryNamespace = "std");

  const std::string& id() const { return id_; }

  IDataFrame parallelize(std::vector<Value> values, int64_t partitions = 0) const;
  IDataFrame textFile(const std::string& path, int64_t minPartitions = 0) const;
  IDataFrame partitionJsonFile(const std::string& path) const;
  IDataFrame partitionObjectFile(const std::string& path) const;

  /// A built-in bundle name or a shared object exporting ignis_register.
  void loadLibrary(const std::string& library) const;
  IDataFrame call(const ISource& fn) const;
  IDataFrame call(const ISource& fn, const IDataFrame& input) const;
  void voidCall(const ISource& fn) const;
  void voidCall(const ISource& fn, const IDataFrame& input) const;
  IDataFrame importData(const IDataFrame& source) const;

  std::vector<scheduler::ExecutorInfo> executors() const;
  void stop() const;

 private:
  scheduler::Backend& backend() const;

  std::string id_;
  uint64_t generation_ = 0;
};

}  // namespace ignis::driver
