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
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ignis/executor/protocol.hpp"
#include "ignis/storage/partition.hpp"
#include "ignis/value.hpp"

namespace ignis::scheduler {

enum class TaskKind { kContainer, kExecutor, kTransform, kAction, kImport };
enum class TaskState { kPending, kRunning, kDone, kFailed };

const char* taskKindName(TaskKind kind);
const char* taskStateName(TaskState state);

struct TaskNode {
  int64_t id = 0;
  TaskKind kind = TaskKind::kTransform;
  std::string op;
  executor::Args params;
  std::vector<int64_t> deps;
  std::string worker;
  TaskState state = TaskState::kPending;
  /// Storage tier requested by persist/cache.
  std::optional<storage::StoreKind> persist;
  /// The output currently resides on the worker's executors.
  bool materialized = false;
  /// The resident output was written with the persist tier.
  bool persistedOutput = false;
  /// Elements the driver scatters for parallelize.
  std::shared_ptr<const std::vector<Value>> driverData;

  /// Times the node's operator ran, including attempts that failed.
  int64_t execCount = 0;
  int keyParts = 0;
  std::vector<int64_t> partsPerRank;
  std::vector<int64_t> countPerRank;
  /// Extra results of the last run (iterate state, action value).
  Value result;

  bool cached() const { return persist.has_value(); }
};

/// The lazy dependency graph of one session.
///
/// Nodes are appended in id order and never removed, so ids double as a
/// topological order.
class TaskGraph {
 public:
  /// Appends a Pending node. kUnknownDependency for ids not yet recorded.
  int64_t record(TaskKind kind, std::string op, executor::Args params, std::vector<int64_t> deps,
                 std::string worker);

  bool contains(int64_t id) const { return id >= 1 && id <= static_cast<int64_t>(nodes_.size()); }
  TaskNode& node(int64_t id);
  const TaskNode& node(int64_t id) const;
  size_t size() const { return nodes_.size(); }

  /// Nodes that must run before `target` can run, in topological order and
  /// ending with `target` itself. Readiness nodes are always included; a
  /// materialized node is reused and its dependencies are not visited.
  std::vector<int64_t> plan(int64_t target) const;

  /// `taskId kind op deps... state cached`, one node per line.
  std::string dump() const;

 private:
  std::vector<TaskNode> nodes_;
};

}  // namespace ignis::scheduler
