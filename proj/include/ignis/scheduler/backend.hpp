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

#include <sys/types.h>

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "ignis/comms/communicator.hpp"
#include "ignis/comms/endpoint.hpp"
#include "ignis/executor/protocol.hpp"
#include "ignis/properties.hpp"
#include "ignis/scheduler/task_graph.hpp"
#include "ignis/storage/partition.hpp"

namespace ignis::scheduler {

/// Recovery instrumentation, cumulative over the session.
struct RecoveryStats {
  int64_t failures = 0;
  int64_t replacements = 0;
  /// Task outputs lost with a failed executor: uncached resident outputs and
  /// tasks of the interrupted attempt.
  int64_t lostTasks = 0;
  /// Executions, during retries, of tasks that had run or were resident when
  /// the failure happened.
  int64_t recomputedTasks = 0;
};

/// Passed to the stage hook before and after a stage is dispatched.
struct StageEvent {
  std::string worker;
  /// Nodes fused into the stage; the last one is the stage output.
  std::vector<int64_t> nodes;
  /// Stage index within the current action attempt.
  int index = 0;
  int attempt = 0;
  bool dispatched = false;
};

struct ExecutorInfo {
  int rank = 0;
  pid_t pid = 0;
  std::string key;
};

/// The scheduler service of one session.
///
/// Driver calls are recorded into a lazy TaskGraph; actions plan and run the
/// missing part of the graph as fused stages on the owning worker's
/// executors. Every public call is executed on the backend's control thread,
/// so calls from several client threads are serialized in arrival order.
class Backend {
 public:
  explicit Backend(Properties props);
  ~Backend();
  Backend(const Backend&) = delete;
  Backend& operator=(const Backend&) = delete;

  /// Shuts every executor down and joins the control thread. Idempotent.
  void stop();
  bool running() const;

  const Properties& properties() const { return props_; }
  const std::string& jobId() const { return jobId_; }

  std::string createCluster(const Properties& props);
  /// Spawns the executors and their Base communicator. kResource when the
  /// configured port list is exhausted.
  std::string createWorker(const std::string& cluster, const std::string& registryNamespace);
  void destroyWorker(const std::string& worker);
  void loadLibrary(const std::string& worker, const std::string& library);

  /// Readiness node that source transforms of the worker depend on.
  int64_t readinessNode(const std::string& worker);
  int64_t record(TaskKind kind, const std::string& op, executor::Args params, std::vector<int64_t> deps,
                 const std::string& worker, std::shared_ptr<const std::vector<Value>> data = nullptr);
  /// Runs an Action node and returns its value.
  Value run(int64_t action);

  /// Sets (tier) or clears (nullopt) the persistence of a transform.
  void persist(int64_t id, std::optional<storage::StoreKind> tier);
  std::string workerOf(int64_t id);
  /// Extra results of the node's last run (iterate state, ...); Null if never run.
  Value nodeResult(int64_t id);

  std::string dumpGraph();
  int64_t execCount(int64_t id);
  /// Sum of execCount over every node of the graph.
  int64_t taskExecutions();
  /// Number of elements each executor held after the node's last run, when
  /// the node ended a stage; empty for nodes fused into a later stage.
  std::vector<int64_t> elementsPerExecutor(int64_t id);
  RecoveryStats recoveryStats();
  std::vector<ExecutorInfo> executors(const std::string& worker);
  /// Executor counters summed over the worker (Args encoding).
  Value metrics(const std::string& worker);
  /// Runs on the control thread around every stage.
  void setStageHook(std::function<void(const StageEvent&)> hook);

 private:
  struct Exec;
  struct Worker;
  struct Stage;
  struct Attempt;

  template <class F>
  auto post(F&& fn) -> decltype(fn());
  void controlLoop();
  void heartbeatLoop();

  // Executor processes.
  uint16_t takePort(const Properties& props);
  void spawnExecutor(Worker& w, int rank);
  void awaitRegistrations(Worker& w, const std::vector<int>& ranks);
  bool alive(Exec& e);
  void killExec(Exec& e);
  void shutdownWorker(Worker& w);

  // Commands.
  struct Call {
    Worker* worker = nullptr;
    int rank = 0;
    uint32_t seq = 0;
    Value reply;
    std::optional<Error> error;
  };
  Call send(Worker& w, int rank, const std::string& cmd, const executor::Args& args);
  void await(Call& call);
  /// Waits for every call, then raises the executor loss or the most
  /// relevant error. `driverError` is a failure of the driver-side part.
  std::vector<Value> finish(std::vector<Call>& calls, const std::optional<Error>& driverError);
  std::vector<Value> broadcast(Worker& w, const std::string& cmd, const executor::Args& args);
  void ensureComms(Worker& w);
  comms::Communicator& driverComm(Worker& w);
  void configure(Worker& w, const std::vector<int>& ranks);

  // Execution.
  Worker& worker(const std::string& id);
  Value runAction(int64_t action);
  Value attemptAction(int64_t action, Attempt& attempt);
  std::vector<Stage> buildStages(const std::vector<int64_t>& plan, int64_t action);
  void runStage(Stage& stage, Attempt& attempt);
  void runImport(Stage& stage, Attempt& attempt);
  Value runActionNode(TaskNode& node, Attempt& attempt);
  void checkReady(Worker& w, TaskNode& node);
  std::optional<storage::StoreKind> persistTarget(const TaskNode& node) const;
  void freeOutputs(Worker& w, const std::vector<int64_t>& ids, bool dropFiles);
  void recover(const std::string& worker, const std::vector<int>& ranks, Attempt& attempt);
  void markExecuted(TaskNode& node, Attempt& attempt);

  Properties props_;
  std::string jobId_;
  std::string diskRoot_;
  std::unique_ptr<comms::Endpoint> ep_;

  mutable std::mutex queueMu_;
  std::condition_variable queueCv_;
  std::deque<std::function<void()>> queue_;
  bool stopping_ = false;
  std::thread control_;
  std::thread::id controlId_;

  // Owned by the control thread.
  TaskGraph graph_;
  std::map<std::string, Properties> clusters_;
  std::map<std::string, std::unique_ptr<Worker>> workers_;
  std::set<uint16_t> usedPorts_;
  uint64_t nextCommId_ = 1;
  uint32_t nextSeq_ = 1;
  int nextCluster_ = 0;
  int nextWorker_ = 0;
  RecoveryStats stats_;
  std::function<void(const StageEvent&)> hook_;

  // Shared with the heartbeat thread.
  mutable std::mutex procMu_;
  std::condition_variable procCv_;
  struct Watched {
    pid_t pid;
    std::string key;
    std::chrono::steady_clock::time_point since;
  };
  std::map<std::string, Watched> watched_;
  std::thread heartbeat_;
  bool heartbeatStop_ = false;
  bool stopped_ = false;
};

}  // namespace ignis::scheduler
