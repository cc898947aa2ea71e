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

#include "ignis/comms/endpoint.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <csignal>
#include <cstring>

#include "ignis/bytes.hpp"

namespace ignis::comms {

namespace {

using Clock = std::chrono::steady_clock;

std::pair<std::string, uint16_t> splitKey(const std::string& key) {
  size_t colon = key.rfind(':');
  if (colon == std::string::npos) fail(ErrorCode::kPrecondition, "bad process address '" + key + "'");
  return {key.substr(0, colon), static_cast<uint16_t>(std::stoi(key.substr(colon + 1)))};
}

sockaddr_in makeAddr(const std::string& host, uint16_t port) {
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(port);
  if (inet_pton(AF_INET, host.c_str(), &sa.sin_addr) != 1) {
    fail(ErrorCode::kPrecondition, "bad IPv4 host '" + host + "'");
  }
  return sa;
}

bool writeAll(int fd, const char* data, size_t n) {
  while (n > 0) {
    ssize_t w = ::send(fd, data, n, MSG_NOSIGNAL);
    if (w < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data += w;
    n -= static_cast<size_t>(w);
  }
  return true;
}

bool readAll(int fd, char* data, size_t n) {
  while (n > 0) {
    ssize_t r = ::recv(fd, data, n, 0);
    if (r < 0 && errno == EINTR) continue;
    if (r <= 0) return false;
    data += r;
    n -= static_cast<size_t>(r);
  }
  return true;
}

bool isDataOpcode(Opcode op) { return op == Opcode::kData || op == Opcode::kPointToPoint; }

}  // namespace

Value ProcessAddr::toValue() const {
  return Value::list({Value::str(host), Value::i64(port), Value::str(workerId), Value::i64(rank)});
}

ProcessAddr ProcessAddr::fromValue(const Value& v) {
  const ValueList& f = v.asList();
  if (f.size() != 4) fail(ErrorCode::kMalformedEncoding, "process address needs 4 fields");
  return {f[0].asStr(), static_cast<uint16_t>(f[1].asI64()), f[2].asStr(), static_cast<int>(f[3].asI64())};
}

Lane laneOf(Opcode op) {
  switch (op) {
    case Opcode::kPointToPoint: return Lane::kPointToPoint;
    case Opcode::kControl:
    case Opcode::kReply: return Lane::kControl;
    case Opcode::kRegister: return Lane::kRegister;
    default: return Lane::kCollective;
  }
}

std::string encodeError(const Error& e) {
  return serializeValue(Value::list({Value::i64(static_cast<int64_t>(e.code())), Value::str(e.what()),
                                     Value::i64(e.rank())}));
}

Error decodeError(std::string_view payload) {
  try {
    Value v = deserializeValue(payload);
    const ValueList& f = v.asList();
    return Error(static_cast<ErrorCode>(f.at(0).asI64()), f.at(1).asStr(), static_cast<int32_t>(f.at(2).asI64()));
  } catch (const std::exception& e) {
    return Error(ErrorCode::kProtocol, std::string("undecodable error payload: ") + e.what());
  }
}

Endpoint::Endpoint(Options options) : options_(std::move(options)) {
  std::signal(SIGPIPE, SIG_IGN);
  listenFd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (listenFd_ < 0) fail(ErrorCode::kBindFailure, std::string("socket: ") + std::strerror(errno));
  int one = 1;
  ::setsockopt(listenFd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in sa = makeAddr(options_.host, options_.port);
  if (::bind(listenFd_, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) < 0 || ::listen(listenFd_, 128) < 0) {
    int err = errno;
    ::close(listenFd_);
    fail(ErrorCode::kBindFailure,
         "cannot listen on " + options_.host + ":" + std::to_string(options_.port) + ": " + std::strerror(err));
  }
  socklen_t len = sizeof(sa);
  ::getsockname(listenFd_, reinterpret_cast<sockaddr*>(&sa), &len);
  port_ = ntohs(sa.sin_port);
  key_ = options_.host + ":" + std::to_string(port_);
  acceptor_ = std::thread([this] { acceptLoop(); });
}

Endpoint::~Endpoint() { close(); }

void Endpoint::close() {
  if (closing_.exchange(true)) return;
  ::shutdown(listenFd_, SHUT_RDWR);
  if (acceptor_.joinable()) acceptor_.join();
  ::close(listenFd_);
  {
    std::lock_guard<std::mutex> lock(connMu_);
    for (auto& [peer, conn] : out_) {
      std::lock_guard<std::mutex> cl(conn->mu);
      if (conn->fd >= 0) ::close(conn->fd);
      conn->fd = -1;
    }
    out_.clear();
  }
  std::vector<std::thread> readers;
  {
    std::lock_guard<std::mutex> lock(mu_);
    for (int fd : readerFds_) ::shutdown(fd, SHUT_RDWR);
    readers.swap(readers_);
  }
  for (auto& t : readers) t.join();
  std::lock_guard<std::mutex> lock(mu_);
  for (int fd : readerFds_) ::close(fd);
  readerFds_.clear();
  cv_.notify_all();
}

void Endpoint::acceptLoop() {
  while (!closing_) {
    pollfd p{listenFd_, POLLIN, 0};
    int rc = ::poll(&p, 1, 200);
    if (rc <= 0) continue;
    int fd = ::accept4(listenFd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) continue;
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    std::lock_guard<std::mutex> lock(mu_);
    if (closing_) {
      ::close(fd);
      break;
    }
    readerFds_.push_back(fd);
    readers_.emplace_back([this, fd] { readLoop(fd); });
  }
}

void Endpoint::readLoop(int fd) {
  std::string peer;
  uint64_t gen = 0;
  std::string body;
  while (true) {
    char lenBuf[kFrameLengthSize];
    if (!readAll(fd, lenBuf, sizeof(lenBuf))) break;
    auto len = static_cast<uint32_t>(loadLE(lenBuf, 4));
    if (len < kFrameHeaderSize || len > kMaxFrameBody) break;
    body.resize(len);
    if (!readAll(fd, body.data(), len)) break;
    Frame f;
    try {
      f = decodeFrameBody(body);
    } catch (const Error&) {
      break;
    }
    if (peer.empty()) {
      if (f.opcode != Opcode::kHello) break;
      peer = f.payload;
      std::lock_guard<std::mutex> lock(mu_);
      gen = ++nextGen_;
      incomingGen_[peer] = gen;
      dead_.erase(peer);
      continue;
    }
    dispatch(peer, std::move(f));
  }
  std::lock_guard<std::mutex> lock(mu_);
  if (!peer.empty() && incomingGen_[peer] == gen) {
    dead_.insert(peer);
    cv_.notify_all();
  }
  if (!closing_) {
    std::erase(readerFds_, fd);
    ::close(fd);
  }
}

void Endpoint::dispatch(const std::string& peer, Frame frame) {
  switch (frame.opcode) {
    case Opcode::kPing:
      if (options_.answerPings) {
        Frame pong;
        pong.opcode = Opcode::kPong;
        try {
          send(peer, pong);
        } catch (const Error&) {
        }
      }
      return;
    case Opcode::kPong: {
      std::lock_guard<std::mutex> lock(mu_);
      lastPong_[peer] = Clock::now();
      cv_.notify_all();
      return;
    }
    case Opcode::kAbort: {
      std::lock_guard<std::mutex> lock(mu_);
      if (!aborted_.count(frame.commId)) aborted_.emplace(frame.commId, decodeError(frame.payload));
      cv_.notify_all();
      return;
    }
    case Opcode::kRegister: {
      std::lock_guard<std::mutex> lock(mu_);
      anySource_.emplace_back(peer, std::move(frame));
      cv_.notify_all();
      return;
    }
    default: {
      std::lock_guard<std::mutex> lock(mu_);
      if (invalid_.count(frame.commId)) return;
      Lane lane = laneOf(frame.opcode);
      mail_[MailKey(frame.commId, peer, lane)].push_back(std::move(frame));
      cv_.notify_all();
      return;
    }
  }
}

std::shared_ptr<Endpoint::Outgoing> Endpoint::outgoing(const std::string& peer) {
  std::lock_guard<std::mutex> lock(connMu_);
  if (closing_) fail(ErrorCode::kPeerLost, "endpoint " + key_ + " is closed");
  auto& slot = out_[peer];
  if (!slot) slot = std::make_shared<Outgoing>();
  return slot;
}

void Endpoint::openLocked(Outgoing& conn, const std::string& peer) {
  if (conn.fd >= 0) return;
  auto [host, port] = splitKey(peer);
  sockaddr_in sa = makeAddr(host, port);
  auto deadline = Clock::now() + std::chrono::milliseconds(options_.connectTimeoutMs);
  std::string lastError;
  while (true) {
    int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (fd < 0) fail(ErrorCode::kResource, std::string("socket: ") + std::strerror(errno));
    if (::connect(fd, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) == 0) {
      int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      Frame hello;
      hello.opcode = Opcode::kHello;
      hello.payload = key_;
      std::string bytes = encodeFrame(hello);
      if (writeAll(fd, bytes.data(), bytes.size())) {
        conn.fd = fd;
        return;
      }
    }
    lastError = std::strerror(errno);
    ::close(fd);
    if (Clock::now() >= deadline || closing_) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  fail(ErrorCode::kConnectTimeout, "cannot connect to " + peer + " within " +
                                       std::to_string(options_.connectTimeoutMs) + " ms: " + lastError);
}

void Endpoint::connect(const std::string& peer) {
  if (peer == key_) return;
  auto conn = outgoing(peer);
  std::lock_guard<std::mutex> lock(conn->mu);
  openLocked(*conn, peer);
}

void Endpoint::send(const std::string& peer, const Frame& frame) {
  if (peer == key_) {
    if (frame.opcode != Opcode::kPing && frame.opcode != Opcode::kPong) dispatch(peer, frame);
    return;
  }
  if (isDead(peer)) fail(ErrorCode::kPeerLost, "peer " + peer + " lost");
  std::string bytes = encodeFrame(frame);
  auto conn = outgoing(peer);
  std::lock_guard<std::mutex> lock(conn->mu);
  openLocked(*conn, peer);
  if (!writeAll(conn->fd, bytes.data(), bytes.size())) {
    ::close(conn->fd);
    conn->fd = -1;
    markDead(peer);
    fail(ErrorCode::kPeerLost, "peer " + peer + " lost (write failed)");
  }
  if (isDataOpcode(frame.opcode)) {
    ++dataFrames_;
    dataBytes_ += bytes.size();
  }
}

Frame Endpoint::recv(uint64_t commId, const std::string& peer, Lane lane, int timeoutMs) {
  std::unique_lock<std::mutex> lock(mu_);
  auto deadline = Clock::now() + std::chrono::milliseconds(timeoutMs < 0 ? 0 : timeoutMs);
  MailKey k(commId, peer, lane);
  while (true) {
    if (invalid_.count(commId)) {
      fail(ErrorCode::kStaleEpoch, "communicator " + std::to_string(commId) + " is no longer valid");
    }
    auto it = mail_.find(k);
    if (it != mail_.end() && !it->second.empty()) {
      Frame f = std::move(it->second.front());
      it->second.pop_front();
      return f;
    }
    if (auto a = aborted_.find(commId); a != aborted_.end() && commId != 0) throw a->second;
    if (dead_.count(peer)) fail(ErrorCode::kPeerLost, "peer " + peer + " lost");
    if (closing_) fail(ErrorCode::kPeerLost, "endpoint " + key_ + " is closed");
    if (timeoutMs < 0) {
      cv_.wait(lock);
    } else if (cv_.wait_until(lock, deadline) == std::cv_status::timeout) {
      if (auto it2 = mail_.find(k); it2 != mail_.end() && !it2->second.empty()) continue;
      fail(ErrorCode::kTimeout, "no message from " + peer + " within " + std::to_string(timeoutMs) + " ms");
    }
  }
}

std::pair<std::string, Frame> Endpoint::recvAny(Lane lane, int timeoutMs) {
  if (lane != Lane::kRegister) fail(ErrorCode::kPrecondition, "recvAny supports the register lane only");
  std::unique_lock<std::mutex> lock(mu_);
  auto deadline = Clock::now() + std::chrono::milliseconds(timeoutMs < 0 ? 0 : timeoutMs);
  while (anySource_.empty()) {
    if (closing_) fail(ErrorCode::kPeerLost, "endpoint " + key_ + " is closed");
    if (timeoutMs < 0) {
      cv_.wait(lock);
    } else if (cv_.wait_until(lock, deadline) == std::cv_status::timeout && anySource_.empty()) {
      fail(ErrorCode::kTimeout, "no registration within " + std::to_string(timeoutMs) + " ms");
    }
  }
  auto out = std::move(anySource_.front());
  anySource_.pop_front();
  return out;
}

bool Endpoint::isDead(const std::string& peer) const {
  std::lock_guard<std::mutex> lock(mu_);
  return dead_.count(peer) != 0;
}

void Endpoint::markDead(const std::string& peer) {
  std::lock_guard<std::mutex> lock(mu_);
  dead_.insert(peer);
  cv_.notify_all();
}

void Endpoint::forget(const std::string& peer) {
  {
    std::lock_guard<std::mutex> lock(connMu_);
    if (auto it = out_.find(peer); it != out_.end()) {
      std::lock_guard<std::mutex> cl(it->second->mu);
      if (it->second->fd >= 0) ::close(it->second->fd);
      it->second->fd = -1;
      out_.erase(it);
    }
  }
  std::lock_guard<std::mutex> lock(mu_);
  dead_.erase(peer);
  incomingGen_.erase(peer);
  lastPong_.erase(peer);
}

void Endpoint::invalidate(uint64_t commId) {
  std::lock_guard<std::mutex> lock(mu_);
  invalid_.insert(commId);
  for (auto it = mail_.begin(); it != mail_.end();) {
    it = std::get<0>(it->first) == commId ? mail_.erase(it) : std::next(it);
  }
  cv_.notify_all();
}

bool Endpoint::isInvalid(uint64_t commId) const {
  std::lock_guard<std::mutex> lock(mu_);
  return invalid_.count(commId) != 0;
}

std::optional<Error> Endpoint::abortedError(uint64_t commId) const {
  std::lock_guard<std::mutex> lock(mu_);
  if (auto it = aborted_.find(commId); it != aborted_.end()) return it->second;
  return std::nullopt;
}

void Endpoint::markAborted(uint64_t commId, const Error& e) {
  std::lock_guard<std::mutex> lock(mu_);
  aborted_.emplace(commId, e);
  cv_.notify_all();
}

void Endpoint::release(uint64_t commId) {
  std::lock_guard<std::mutex> lock(mu_);
  for (auto it = mail_.begin(); it != mail_.end();) {
    it = std::get<0>(it->first) == commId ? mail_.erase(it) : std::next(it);
  }
  aborted_.erase(commId);
}

std::optional<std::chrono::steady_clock::time_point> Endpoint::lastPong(const std::string& peer) const {
  std::lock_guard<std::mutex> lock(mu_);
  if (auto it = lastPong_.find(peer); it != lastPong_.end()) return it->second;
  return std::nullopt;
}

}  // namespace ignis::comms
