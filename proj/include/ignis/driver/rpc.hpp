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
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "ignis/value.hpp"

namespace ignis::driver {

/// Remote driver protocol.
///
/// Every message is a frame: u32 LE length, then the body. The client opens
/// with the body "IGNR" u8 version and gets a response. A request body is a
/// u16 LE method id followed by the TLV encoding of a List of arguments; a
/// response body is a u8 status (0 ok, 1 error) followed by one TLV value,
/// the result or a Str message "CodeName: text".
inline constexpr char kRpcMagic[4] = {'I', 'G', 'N', 'R'};
inline constexpr uint8_t kRpcVersion = 1;
/// Bodies longer than this close the connection.
inline constexpr uint32_t kRpcMaxBody = 256u << 20;

struct RpcMethod {
  uint16_t id;
  /// "Class.method", with "new" for constructors.
  const char* name;
  /// Argument list and result, for documentation.
  const char* signature;
};

/// The frozen method table of protocol version 1.
const std::vector<RpcMethod>& rpcMethods();
/// 0 when the name is unknown.
uint16_t rpcMethodId(const std::string& name);

/// Serves the driver API of this process's session to remote clients.
/// Connections are handled concurrently; calls run one at a time in arrival
/// order.
class RpcServer {
 public:
  /// Binds and starts accepting. Port 0 picks a free port. kBindFailure when
  /// the address cannot be bound.
  explicit RpcServer(uint16_t port = 0, const std::string& host = "127.0.0.1");
  ~RpcServer();
  RpcServer(const RpcServer&) = delete;
  RpcServer& operator=(const RpcServer&) = delete;

  uint16_t port() const;
  /// Closes the listener and every connection. Idempotent.
  void stop();

 private:
  struct State;
  std::shared_ptr<State> state_;
};

/// Blocking client for one connection; one outstanding request at a time.
class RpcClient {
 public:
  /// Connects and performs the handshake. kProtocol when the server rejects
  /// the version, kIo when the connection fails.
  static RpcClient connect(const std::string& host, uint16_t port, uint8_t version = kRpcVersion);

  RpcClient(RpcClient&& other) noexcept;
  RpcClient& operator=(RpcClient&& other) noexcept;
  ~RpcClient();

  /// Runs a method. Error responses are rethrown as Error with the code
  /// named in the message.
  Value invoke(uint16_t method, ValueList args);
  Value invoke(const std::string& method, ValueList args);

  /// Sends a raw body and returns (status, payload) of the response.
  std::pair<uint8_t, Value> exchange(const std::string& body);
  void close();

 private:
  explicit RpcClient(int fd) : fd_(fd) {}
  int fd_ = -1;
};

}  // namespace ignis::driver
