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
#include <string>

#include "ignis/comms/communicator.hpp"
#include "ignis/comms/endpoint.hpp"
#include "ignis/executor/ops.hpp"
#include "ignis/executor/protocol.hpp"
#include "ignis/executor/registry.hpp"
#include "ignis/properties.hpp"

namespace ignis::executor {

/// The command loop of one executor process.
///
/// Registers with the driver, then executes control commands one at a time
/// on the calling thread. Datasets produced by stages stay resident until the
/// driver frees them.
class ExecutorService {
 public:
  struct Options {
    std::string driverKey;
    std::string workerId;
    int rank = 0;
    std::string host = "127.0.0.1";
    uint16_t port = 0;
    int connectTimeoutMs = 10000;
  };

  explicit ExecutorService(Options options);
  ~ExecutorService();

  /// Returns 0 after a shutdown command, 1 when the driver is lost.
  int run();

  const std::string& key() const { return ep_.key(); }

 private:
  Value handle(const std::string& name, const Args& args);
  Value configure(const Args& args);
  Value commCreate(const Args& args);
  Value stage(const Args& args);
  Value action(const Args& args);
  Value importData(const Args& args);
  Value freeDatasets(const Args& args);
  Value restore(const Args& args);
  Value metrics() const;

  Dataset runBase(const TaskEnv& env, const OpSpec& base, Args& extra);
  Dataset callFunction(const TaskEnv& env, const Args& args, bool returnsValue);
  Dataset iterate(const TaskEnv& env, const Dataset& input, const Args& args, Args& extra);
  Value toDriver(std::vector<Value> values);
  const Dataset& dataset(int64_t id) const;
  TaskEnv makeEnv() const;
  void abortComms(const Error& e);

  Options options_;
  comms::Endpoint ep_;
  Registry registry_;
  Properties props_;
  std::string jobId_;
  std::string registryNamespace_;
  int count_ = 1;
  std::unique_ptr<comms::Communicator> base_;
  std::unique_ptr<comms::Communicator> driver_;
  std::map<int64_t, Dataset> outputs_;
  mutable Metrics metrics_;
};

}  // namespace ignis::executor
