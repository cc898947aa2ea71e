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

#include "ignis/scheduler/task_graph.hpp"

#include <set>
#include <sstream>

namespace ignis::scheduler {

const char* taskKindName(TaskKind kind) {
  switch (kind) {
    case TaskKind::kContainer:
      return "Container";
    case TaskKind::kExecutor:
      return "Executor";
    case TaskKind::kTransform:
      return "Transform";
    case TaskKind::kAction:
      return "Action";
    case TaskKind::kImport:
      return "Import";
  }
  return "?";
}

const char* taskStateName(TaskState state) {
  switch (state) {
    case TaskState::kPending:
      return "Pending";
    case TaskState::kRunning:
      return "Running";
    case TaskState::kDone:
      return "Done";
    case TaskState::kFailed:
      return "Failed";
  }
  return "?";
}

int64_t TaskGraph::record(TaskKind kind, std::string op, executor::Args params, std::vector<int64_t> deps,
                          std::string worker) {
  for (int64_t d : deps) {
    if (!contains(d)) fail(ErrorCode::kUnknownDependency, "unknown task dependency " + std::to_string(d));
  }
  TaskNode n;
  n.id = static_cast<int64_t>(nodes_.size()) + 1;
  n.kind = kind;
  n.op = std::move(op);
  n.params = std::move(params);
  n.deps = std::move(deps);
  n.worker = std::move(worker);
  nodes_.push_back(std::move(n));
  return nodes_.back().id;
}

TaskNode& TaskGraph::node(int64_t id) {
  if (!contains(id)) fail(ErrorCode::kUnknownDependency, "unknown task " + std::to_string(id));
  return nodes_[static_cast<size_t>(id - 1)];
}

const TaskNode& TaskGraph::node(int64_t id) const {
  if (!contains(id)) fail(ErrorCode::kUnknownDependency, "unknown task " + std::to_string(id));
  return nodes_[static_cast<size_t>(id - 1)];
}

std::vector<int64_t> TaskGraph::plan(int64_t target) const {
  std::set<int64_t> needed;
  std::set<std::string> workers;
  std::vector<int64_t> stack{target};
  while (!stack.empty()) {
    int64_t id = stack.back();
    stack.pop_back();
    const TaskNode& n = node(id);
    workers.insert(n.worker);
    if (n.materialized && id != target) continue;
    if (!needed.insert(id).second) continue;
    for (int64_t d : n.deps) stack.push_back(d);
  }
  for (const TaskNode& n : nodes_) {
    if ((n.kind == TaskKind::kContainer || n.kind == TaskKind::kExecutor) && workers.count(n.worker)) {
      needed.insert(n.id);
    }
  }
  // Ids increase along every edge.
  return {needed.begin(), needed.end()};
}

std::string TaskGraph::dump() const {
  std::ostringstream os;
  for (const TaskNode& n : nodes_) {
    os << n.id << ' ' << taskKindName(n.kind) << ' ' << (n.op.empty() ? "-" : n.op);
    for (int64_t d : n.deps) os << ' ' << d;
    os << ' ' << taskStateName(n.state) << ' ' << (n.cached() ? "cached" : "-") << '\n';
  }
  return os.str();
}

}  // namespace ignis::scheduler
