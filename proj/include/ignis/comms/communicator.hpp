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
#include <string>
#include <vector>

#include "ignis/comms/endpoint.hpp"
#include "ignis/properties.hpp"
#include "ignis/value.hpp"

namespace ignis::comms {

enum class CommKind : uint8_t { kBase = 0, kDriver = 1, kInterWorker = 2 };

const char* commKindName(CommKind kind);

/// Membership of a communicator. Every member holds an identical copy.
struct CommDesc {
  uint64_t id = 0;
  uint32_t epoch = 0;
  CommKind kind = CommKind::kBase;
  std::vector<ProcessAddr> members;
  /// Id of the communicator this one replaced after a member loss; 0 if none.
  uint64_t replaces = 0;

  int size() const { return static_cast<int>(members.size()); }
  /// Virtual channel; distinct for every live communicator of a job.
  uint16_t channel() const { return static_cast<uint16_t>(id & 0xffff); }
  /// Rank of a transport key, or -1.
  int rankOf(const std::string& key) const;

  Value toValue() const;
  static CommDesc fromValue(const Value& v);
  bool operator==(const CommDesc&) const = default;
};

/// Descriptor builders. Ids are allocated by the caller (the driver).
CommDesc createBase(uint64_t id, const WorkerDesc& worker, std::vector<ProcessAddr> addrs);
CommDesc attachDriver(uint64_t id, const CommDesc& base, const ProcessAddr& driver);
CommDesc joinWorkers(uint64_t id, const CommDesc& a, const CommDesc& b);
CommDesc replaceMember(uint64_t id, const CommDesc& c, int lostRank, const ProcessAddr& replacement);

using ReduceOp = std::function<Value(const Value&, const Value&)>;

enum class CollectiveOp : uint16_t {
  kBarrier = 1,
  kBroadcast = 2,
  kScatter = 3,
  kGather = 4,
  kReduce = 5,
  kAllreduce = 6,
  kAlltoall = 7,
};

/// One member's view of a communicator.
///
/// Every collective call takes the next sequence number and, when size > 1,
/// starts with a handshake through rank 0 that compares (sequence, op, root)
/// across members, so a disagreement surfaces as kCollectiveMismatch or
/// kRootMismatch on every member instead of a hang. Any failure inside a
/// collective is forwarded to the other members as an abort, after which the
/// communicator is unusable and must be rebuilt.
class Communicator {
 public:
  Communicator(Endpoint& endpoint, CommDesc desc, int rank);
  ~Communicator();
  Communicator(const Communicator&) = delete;
  Communicator& operator=(const Communicator&) = delete;

  /// Connects to every member and runs a barrier. kConnectTimeout names the
  /// unreachable member. Invalidates the replaced communicator id, if any.
  void open();

  int rank() const { return rank_; }
  int size() const { return desc_.size(); }
  const CommDesc& desc() const { return desc_; }
  uint64_t id() const { return desc_.id; }
  uint32_t epoch() const { return desc_.epoch; }
  uint32_t sequence() const { return seq_; }
  Endpoint& endpoint() { return ep_; }

  void barrier();
  std::string broadcast(int root, std::string payload);
  /// Root supplies size() parts; others pass an empty vector.
  std::string scatter(int root, std::vector<std::string> parts);
  /// Root receives payloads in rank order; others get an empty vector.
  std::vector<std::string> gather(int root, std::string payload);
  /// Rank-order fold of the members' values. Non-root members return Null.
  /// `tree` selects the binomial tree; by default it is used when size >= 4.
  Value reduce(int root, const Value& v, const ReduceOp& op, int tree = -1);
  Value allreduce(const Value& v, const ReduceOp& op, int tree = -1);
  /// Member j receives at index i what member i placed at index j.
  std::vector<std::string> alltoall(std::vector<std::string> outboxes);

  void send(int toRank, std::string payload);
  std::string recv(int fromRank);

  /// Marks the communicator failed on every reachable member.
  void abort(const Error& cause);

 private:
  class Scope;

  void handshake(CollectiveOp op, int root);
  void sendData(int toRank, const std::string& payload);
  std::string recvData(int fromRank);
  Frame recvFrame(int fromRank, Lane lane);
  void sendFrame(int toRank, Frame f);
  [[noreturn]] void rethrowWithRank(const Error& e, int peerRank);
  std::string bcastImpl(int root, std::string payload, bool tree);
  Value reduceImpl(int root, const Value& v, const ReduceOp& op, bool tree);
  bool useTree(int tree) const { return tree < 0 ? size() >= 4 : tree != 0; }
  void checkUsable();

  Endpoint& ep_;
  CommDesc desc_;
  int rank_;
  uint32_t seq_ = 0;
  std::atomic<bool> busy_{false};
};

}  // namespace ignis::comms
