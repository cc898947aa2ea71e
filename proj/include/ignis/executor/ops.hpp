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

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "ignis/executor/context.hpp"
#include "ignis/executor/protocol.hpp"
#include "ignis/executor/registry.hpp"
#include "ignis/storage/partition.hpp"

namespace ignis::executor {

using PartRef = std::shared_ptr<storage::Partition>;

/// One executor's share of a dataframe.
struct Dataset {
  std::vector<PartRef> parts;
  /// When > 0 every element is a Pair whose key hashes to partition
  /// hashValue(key) mod keyParts, and this executor holds exactly the
  /// partitions it owns under blockStart/blockOwner, in index order.
  int keyParts = 0;

  uint64_t size() const;
  std::vector<Value> values() const;
};

struct Metrics {
  std::atomic<uint64_t> partitionPasses{0};
  std::atomic<uint64_t> stages{0};
  std::atomic<uint64_t> exchangeMessages{0};
  std::atomic<uint64_t> exchangeBytes{0};
};

/// What operators need from their executor.
struct TaskEnv {
  Context ctx;
  const Registry* registry = nullptr;
  /// Tier for newly created partitions.
  storage::StoreKind store;
  /// When set, Disk partitions are named part-NNNNN.ignp inside store.dir and
  /// kept after the dataset is freed.
  bool persistFiles = false;
  int threads = 1;
  Metrics* metrics = nullptr;

  int rank() const { return ctx.executorRank; }
  int size() const { return ctx.executorCount; }
  comms::Communicator& comm() const { return ctx.base(); }
  PartRef newPartition(size_t localIndex) const;
  UserFn fn(const Value& ref, int arity) const { return UserFn::resolve(ref, *registry, arity); }
};

// Deterministic helpers.

uint64_t splitmix64(uint64_t& state);
/// Uniform double in [0, 1).
double uniform01(uint64_t& state);
uint64_t poisson(uint64_t& state, double mean);

/// First partition index owned by executor e when n partitions are spread over
/// p executors in contiguous blocks.
int64_t blockStart(int e, int64_t n, int p);
int blockOwner(int64_t j, int64_t n, int p);
/// Partition of global element g when `total` elements are split into n
/// near-equal contiguous partitions (earlier partitions take the remainder).
int64_t evenPartitionOf(int64_t g, int64_t total, int64_t n);
int64_t evenPartitionSize(int64_t j, int64_t total, int64_t n);

/// Exclusive prefix of `local` over the communicator ranks, plus the total.
struct GlobalOffset {
  int64_t offset = 0;
  int64_t total = 0;
  std::vector<int64_t> perRank;
};
GlobalOffset globalOffset(comms::Communicator* comm, int64_t local);

/// Runs fn(index, thread) for every index in [0, n) on up to `threads`
/// threads. The exception of the lowest failing index is rethrown.
void parallelFor(size_t n, int threads, const std::function<void(size_t, int)>& fn);

/// Re-raises a user function failure with its position.
[[noreturn]] void rethrowUserError(const std::string& op, const UserFn& fn, int rank, size_t part, size_t index);

// Narrow operators, fused into a single pass per partition.
Dataset runChain(const TaskEnv& env, const Dataset& input, const std::vector<OpSpec>& chain);

// Shuffling operators. Every executor of the communicator calls them together.
enum class KeyedKind { kGroup, kReduce, kAggregate, kCountByKey, kCountByValue, kDistinct };
Dataset keyedAggregate(const TaskEnv& env, const Dataset& input, KeyedKind kind, const Args& args);
Dataset joinDatasets(const TaskEnv& env, const Dataset& left, const Dataset& right, const Args& args);
Dataset unionDatasets(const Dataset& left, const Dataset& right);
Dataset sortDataset(const TaskEnv& env, const Dataset& input, const Args& args);
Dataset repartitionDataset(const TaskEnv& env, const Dataset& input, int64_t n);
Dataset partitionByDataset(const TaskEnv& env, const Dataset& input, const Args& args);

/// PSRS pivot choice from the sorted sample list: p - 1 pivots.
std::vector<size_t> pivotIndices(size_t samples, int p);
/// Regular sample positions of a locally sorted run of m elements.
std::vector<size_t> samplePositions(size_t m, int p);

// Sources and sinks.
struct TextSplit {
  std::string path;
  uint64_t begin = 0;
  uint64_t end = 0;
};
/// Byte-range splits over the file or the sorted regular files of a
/// directory. Every file gets at least one split and splits are ordered by
/// (file, offset).
std::vector<TextSplit> planTextSplits(const std::string& path, int64_t minPartitions);
/// Lines starting inside [begin, end), with the newline and a trailing CR
/// removed and invalid UTF-8 replaced by U+FFFD.
std::vector<std::string> readSplitLines(const TextSplit& split);
std::string sanitizeUtf8(std::string_view s);
/// Regular files of a directory sorted by name, or the path itself.
std::vector<std::string> listInputFiles(const std::string& path);

Dataset readTextFile(const TaskEnv& env, const std::string& path, int64_t minPartitions);
Dataset readJsonFiles(const TaskEnv& env, const std::string& path);
Dataset readObjectFiles(const TaskEnv& env, const std::string& path);

std::string valueToJson(const Value& v);
Value jsonToValue(std::string_view text);

void writeTextFiles(const TaskEnv& env, const Dataset& input, const std::string& path);
void writeJsonFiles(const TaskEnv& env, const Dataset& input, const std::string& path);
void writeObjectFiles(const TaskEnv& env, const Dataset& input, const std::string& path, int level);

// Executor-side parts of actions. Results are meaningful at rank 0 unless
// stated otherwise.
int64_t countAction(const TaskEnv& env, const Dataset& input);
/// List[] when the dataframe is empty, else List[result].
Value reduceAction(const TaskEnv& env, const Dataset& input, const Args& args);
Value aggregateAction(const TaskEnv& env, const Dataset& input, const Args& args, bool fold);
/// List[] when empty, else List[element].
Value extremeAction(const TaskEnv& env, const Dataset& input, const Args& args, bool max);
/// Local candidates for take/top/takeSample, merged at the driver.
std::vector<Value> takeLocal(const Dataset& input, int64_t n);
std::vector<Value> topLocal(const TaskEnv& env, const Dataset& input, const Args& args);
/// Pair(I64 draw, element) for the draws that fall on this executor.
std::vector<Value> takeSampleLocal(const TaskEnv& env, const Dataset& input, const Args& args);
/// Sample indices drawn from [0, total): distinct unless withReplacement.
std::vector<int64_t> sampleIndices(int64_t total, int64_t n, bool withReplacement, uint64_t seed);

}  // namespace ignis::executor
