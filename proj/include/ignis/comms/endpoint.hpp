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
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "ignis/comms/frame.hpp"
#include "ignis/error.hpp"
#include "ignis/value.hpp"

namespace ignis::comms {

/// Network identity of one engine process.
struct ProcessAddr {
  std::string host = "127.0.0.1";
  uint16_t port = 0;
  std::string workerId;
  int rank = 0;

  /// "host:port"; the transport-level identity.
  std::string key() const { return host + ":" + std::to_string(port); }

  Value toValue() const;
  static ProcessAddr fromValue(const Value& v);
  bool operator==(const ProcessAddr&) const = default;
};

/// Independent receive queues per (communicator, peer).
enum class Lane : uint8_t { kCollective = 0, kPointToPoint = 1, kControl = 2, kRegister = 3 };

Lane laneOf(Opcode op);

/// Error payloads carried by kAbort frames and control replies.
std::string encodeError(const Error& e);
Error decodeError(std::string_view payload);

/// One listening socket plus lazily opened outgoing connections.
///
/// Every incoming connection starts with a kHello frame naming the sender's
/// key and gets its own reader thread that files frames into mailboxes keyed
/// by (commId, sender, lane). End-of-stream on an incoming connection marks
/// the sender dead; blocked receivers then fail with kPeerLost.
class Endpoint {
 public:
  struct Options {
    std::string host = "127.0.0.1";
    uint16_t port = 0;
    int connectTimeoutMs = 10000;
    bool answerPings = true;
  };

  explicit Endpoint(Options options);
  ~Endpoint();
  Endpoint(const Endpoint&) = delete;
  Endpoint& operator=(const Endpoint&) = delete;

  const std::string& key() const { return key_; }
  uint16_t port() const { return port_; }
  const std::string& host() const { return options_.host; }
  int connectTimeoutMs() const { return options_.connectTimeoutMs; }

  /// Opens the outgoing connection if needed. kConnectTimeout when the peer
  /// does not accept within the connect timeout.
  void connect(const std::string& peer);

  /// Frames to one peer are delivered in send order. Sending to key()
  /// short-circuits into the local mailboxes.
  void send(const std::string& peer, const Frame& frame);

  /// Blocks until a frame for (commId, peer, lane) is available. Throws
  /// kPeerLost when the peer is dead and nothing is queued, kStaleEpoch when
  /// the communicator id was invalidated, the abort error when a member
  /// aborted the communicator, and kTimeout when timeoutMs >= 0 elapses.
  Frame recv(uint64_t commId, const std::string& peer, Lane lane, int timeoutMs = -1);

  /// Receives from any peer on an id-0 lane (registration).
  std::pair<std::string, Frame> recvAny(Lane lane, int timeoutMs = -1);

  bool isDead(const std::string& peer) const;
  void markDead(const std::string& peer);
  /// Clears the dead mark and cached connection of a peer key, e.g. when a
  /// replacement process reuses the address.
  void forget(const std::string& peer);

  void invalidate(uint64_t commId);
  bool isInvalid(uint64_t commId) const;
  std::optional<Error> abortedError(uint64_t commId) const;
  void markAborted(uint64_t commId, const Error& e);
  /// Drops queued frames of a communicator.
  void release(uint64_t commId);

  /// Time the last kPong from a peer arrived; nullopt if never.
  std::optional<std::chrono::steady_clock::time_point> lastPong(const std::string& peer) const;

  /// Data-carrying frames (collective data and point-to-point) sent to other
  /// processes.
  uint64_t dataFramesSent() const { return dataFrames_.load(); }
  uint64_t dataBytesSent() const { return dataBytes_.load(); }

  void close();

 private:
  struct Outgoing {
    std::mutex mu;
    int fd = -1;
  };
  using MailKey = std::tuple<uint64_t, std::string, Lane>;

  void acceptLoop();
  void readLoop(int fd);
  void dispatch(const std::string& peer, Frame frame);
  std::shared_ptr<Outgoing> outgoing(const std::string& peer);
  void openLocked(Outgoing& conn, const std::string& peer);

  Options options_;
  std::string key_;
  uint16_t port_ = 0;
  int listenFd_ = -1;
  std::atomic<bool> closing_{false};
  std::thread acceptor_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::map<MailKey, std::deque<Frame>> mail_;
  std::deque<std::pair<std::string, Frame>> anySource_;
  std::set<std::string> dead_;
  std::set<uint64_t> invalid_;
  std::map<uint64_t, Error> aborted_;
  std::map<std::string, std::chrono::steady_clock::time_point> lastPong_;
  std::map<std::string, uint64_t> incomingGen_;
  uint64_t nextGen_ = 0;
  std::vector<int> readerFds_;
  std::vector<std::thread> readers_;

  std::mutex connMu_;
  std::map<std::string, std::shared_ptr<Outgoing>> out_;

  std::atomic<uint64_t> dataFrames_{0};
  std::atomic<uint64_t> dataBytes_{0};
};

}  // namespace ignis::comms
