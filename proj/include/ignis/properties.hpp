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
#include <string>
#include <vector>

#include "ignis/value.hpp"

namespace ignis {

// Property keys understood by the engine.
namespace props {
inline constexpr const char* kExecutorInstances = "ignis.executor.instances";
inline constexpr const char* kExecutorCores = "ignis.executor.cores";
inline constexpr const char* kExecutorBinary = "ignis.executor.binary";
inline constexpr const char* kPartitionNumber = "ignis.partition.number";
inline constexpr const char* kPartitionStorage = "ignis.partition.storage";
inline constexpr const char* kPartitionCompression = "ignis.partition.compression";
inline constexpr const char* kPartitionDiskDir = "ignis.partition.disk.dir";
inline constexpr const char* kTransportHost = "ignis.transport.host";
inline constexpr const char* kTransportPorts = "ignis.transport.ports";
inline constexpr const char* kTransportConnectTimeout = "ignis.transport.connect.timeout";
inline constexpr const char* kHeartbeatInterval = "ignis.heartbeat.interval";
inline constexpr const char* kHeartbeatMisses = "ignis.heartbeat.misses";
inline constexpr const char* kRecoveryAttempts = "ignis.recovery.attempts";
inline constexpr const char* kIterateMax = "ignis.iterate.max";
inline constexpr const char* kCollectLimit = "ignis.collect.limit";
inline constexpr const char* kWorkerShared = "ignis.worker.shared";
inline constexpr const char* kDriverPrefix = "ignis.driver.";
}  // namespace props

/// String-to-string configuration with engine defaults.
///
/// Lookups of unset keys fall back to the documented default; every default
/// can be overridden before a worker is created.
class Properties {
 public:
  Properties() = default;

  static const std::map<std::string, std::string>& defaults();

  void set(const std::string& key, const std::string& value) { entries_[key] = value; }
  bool contains(const std::string& key) const;
  void erase(const std::string& key) { entries_.erase(key); }
  bool isSet(const std::string& key) const { return entries_.count(key) != 0; }

  /// Explicit value, else default, else kUsage error.
  std::string get(const std::string& key) const;
  std::string getOr(const std::string& key, const std::string& fallback) const;
  int64_t getInt(const std::string& key) const;
  bool getBool(const std::string& key) const;
  std::vector<uint16_t> getPorts(const std::string& key) const;

  /// Applies `other` on top of this set.
  void merge(const Properties& other);

  const std::map<std::string, std::string>& entries() const { return entries_; }

  /// List of Pair(Str key, Str value), sorted by key.
  Value toValue() const;
  static Properties fromValue(const Value& v);

  /// Parses `key=value` lines; blank lines and lines starting with '#' are
  /// ignored.
  static Properties parse(const std::string& text);
  std::string format() const;

 private:
  std::map<std::string, std::string> entries_;
};

/// One worker: a group of executor processes bound to a function-registry
/// namespace.
struct WorkerDesc {
  std::string id;
  std::string registryNamespace;
  int executorCount = 1;
  bool sharedMode = false;
};

/// A group of workers sharing one resource configuration.
struct ClusterDesc {
  std::string id;
  Properties properties;
  std::vector<WorkerDesc> workers;
};

}  // namespace ignis
