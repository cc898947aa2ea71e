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

#include "ignis/comms/communicator.hpp"

#include "ignis/bytes.hpp"

namespace ignis::comms {

const char* commKindName(CommKind kind) {
  switch (kind) {
    case CommKind::kBase: return "base";
    case CommKind::kDriver: return "driver";
    case CommKind::kInterWorker: return "inter-worker";
  }
  return "?";
}

int CommDesc::rankOf(const std::string& key) const {
  for (int r = 0; r < size(); ++r) {
    if (members[r].key() == key) return r;
  }
  return -1;
}

Value CommDesc::toValue() const {
  ValueList ms;
  for (const ProcessAddr& a : members) ms.push_back(a.toValue());
  return Value::list({Value::i64(static_cast<int64_t>(id)), Value::i64(epoch), Value::i64(static_cast<int>(kind)),
                      Value::list(std::move(ms)), Value::i64(static_cast<int64_t>(replaces))});
}

CommDesc CommDesc::fromValue(const Value& v) {
  const ValueList& f = v.asList();
  if (f.size() != 5) fail(ErrorCode::kMalformedEncoding, "communicator descriptor needs 5 fields");
  CommDesc d;
  d.id = static_cast<uint64_t>(f[0].asI64());
  d.epoch = static_cast<uint32_t>(f[1].asI64());
  d.kind = static_cast<CommKind>(f[2].asI64());
  for (const Value& m : f[3].asList()) d.members.push_back(ProcessAddr::fromValue(m));
  d.replaces = static_cast<uint64_t>(f[4].asI64());
  return d;
}

CommDesc createBase(uint64_t id, const WorkerDesc& worker, std::vector<ProcessAddr> addrs) {
  if (addrs.empty()) fail(ErrorCode::kPrecondition, "base communicator needs at least one executor");
  CommDesc d;
  d.id = id;
  d.kind = CommKind::kBase;
  for (size_t i = 0; i < addrs.size(); ++i) {
    addrs[i].workerId = worker.id;
    addrs[i].rank = static_cast<int>(i);
  }
  d.members = std::move(addrs);
  return d;
}

CommDesc attachDriver(uint64_t id, const CommDesc& base, const ProcessAddr& driver) {
  if (base.kind != CommKind::kBase) {
    fail(ErrorCode::kPrecondition,
         std::string("attachDriver needs a base communicator, got ") + commKindName(base.kind));
  }
  CommDesc d;
  d.id = id;
  d.kind = CommKind::kDriver;
  d.members.push_back(driver);
  d.members.back().rank = 0;
  for (const ProcessAddr& a : base.members) {
    d.members.push_back(a);
    d.members.back().rank = a.rank + 1;
  }
  return d;
}

CommDesc joinWorkers(uint64_t id, const CommDesc& a, const CommDesc& b) {
  if (a.kind != CommKind::kBase || b.kind != CommKind::kBase) {
    fail(ErrorCode::kPrecondition, "joinWorkers needs two base communicators");
  }
  if (a.id == b.id || (!a.members.empty() && !b.members.empty() && a.members[0].workerId == b.members[0].workerId)) {
    fail(ErrorCode::kSameWorker, "cannot join a worker with itself");
  }
  CommDesc d;
  d.id = id;
  d.kind = CommKind::kInterWorker;
  d.members = a.members;
  d.members.insert(d.members.end(), b.members.begin(), b.members.end());
  return d;
}

CommDesc replaceMember(uint64_t id, const CommDesc& c, int lostRank, const ProcessAddr& replacement) {
  if (lostRank < 0 || lostRank >= c.size()) {
    fail(ErrorCode::kPrecondition, "rank " + std::to_string(lostRank) + " is outside a communicator of size " +
                                       std::to_string(c.size()));
  }
  CommDesc d = c;
  d.id = id;
  d.epoch = c.epoch + 1;
  d.replaces = c.id;
  ProcessAddr r = replacement;
  r.workerId = c.members[lostRank].workerId;
  r.rank = c.members[lostRank].rank;
  d.members[lostRank] = r;
  return d;
}

class Communicator::Scope {
 public:
  explicit Scope(Communicator& c) : c_(c) {
    if (c_.busy_.exchange(true)) {
      fail(ErrorCode::kCollectiveBusy,
           "communicator " + std::to_string(c_.id()) + " already has a collective in flight on this member");
    }
  }
  ~Scope() { c_.busy_ = false; }

 private:
  Communicator& c_;
};

Communicator::Communicator(Endpoint& endpoint, CommDesc desc, int rank)
    : ep_(endpoint), desc_(std::move(desc)), rank_(rank) {
  if (rank_ < 0 || rank_ >= desc_.size()) fail(ErrorCode::kPrecondition, "rank outside communicator");
}

Communicator::~Communicator() { ep_.release(desc_.id); }

void Communicator::open() {
  if (desc_.replaces != 0) ep_.invalidate(desc_.replaces);
  for (int r = 0; r < size(); ++r) {
    if (r == rank_) continue;
    try {
      ep_.connect(desc_.members[r].key());
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kConnectTimeout) {
        fail(ErrorCode::kConnectTimeout, "member rank " + std::to_string(r) + " (" + desc_.members[r].key() +
                                             ") of communicator " + std::to_string(id()) + " unreachable: " + e.what(),
             r);
      }
      throw;
    }
  }
  barrier();
}

void Communicator::checkUsable() {
  if (ep_.isInvalid(desc_.id)) {
    fail(ErrorCode::kStaleEpoch, "communicator " + std::to_string(id()) + " epoch " + std::to_string(epoch()) +
                                     " is no longer valid");
  }
  if (auto e = ep_.abortedError(desc_.id)) throw *e;
}

void Communicator::rethrowWithRank(const Error& e, int peerRank) {
  if (e.code() == ErrorCode::kPeerLost && ep_.isDead(desc_.members[peerRank].key())) {
    fail(ErrorCode::kPeerLost, "rank " + std::to_string(peerRank) + " (" + desc_.members[peerRank].key() +
                                   ") of communicator " + std::to_string(id()) + " lost",
         peerRank);
  }
  throw e;
}

void Communicator::sendFrame(int toRank, Frame f) {
  f.commId = desc_.id;
  f.epoch = desc_.epoch;
  f.channel = desc_.channel();
  try {
    ep_.send(desc_.members[toRank].key(), f);
  } catch (const Error& e) {
    rethrowWithRank(e, toRank);
  }
}

Frame Communicator::recvFrame(int fromRank, Lane lane) {
  while (true) {
    Frame f;
    try {
      f = ep_.recv(desc_.id, desc_.members[fromRank].key(), lane);
    } catch (const Error& e) {
      rethrowWithRank(e, fromRank);
    }
    if (f.epoch == desc_.epoch) return f;
  }
}

void Communicator::sendData(int toRank, const std::string& payload) {
  Frame f;
  f.seq = seq_;
  f.opcode = Opcode::kData;
  f.payload = payload;
  sendFrame(toRank, std::move(f));
}

std::string Communicator::recvData(int fromRank) {
  Frame f = recvFrame(fromRank, Lane::kCollective);
  if (f.opcode != Opcode::kData || f.seq != seq_) {
    fail(ErrorCode::kCollectiveMismatch, "rank " + std::to_string(fromRank) + " sent opcode " +
                                             std::to_string(static_cast<int>(f.opcode)) + " for sequence " +
                                             std::to_string(f.seq) + ", expected data for sequence " +
                                             std::to_string(seq_),
         fromRank);
  }
  return std::move(f.payload);
}

void Communicator::handshake(CollectiveOp op, int root) {
  checkUsable();
  ++seq_;
  if (root < 0 || root >= size()) {
    fail(ErrorCode::kRootMismatch, "root " + std::to_string(root) + " outside communicator of size " +
                                       std::to_string(size()));
  }
  if (size() == 1) return;
  std::string mine;
  putU16(mine, static_cast<uint16_t>(op));
  putU32(mine, static_cast<uint32_t>(root));
  if (rank_ != 0) {
    Frame hs;
    hs.seq = seq_;
    hs.opcode = Opcode::kHandshake;
    hs.payload = mine;
    sendFrame(0, std::move(hs));
    Frame v = recvFrame(0, Lane::kCollective);
    if (v.opcode != Opcode::kVerdict || v.seq != seq_) {
      fail(ErrorCode::kCollectiveMismatch, "expected verdict for sequence " + std::to_string(seq_) + ", got opcode " +
                                               std::to_string(static_cast<int>(v.opcode)) + " sequence " +
                                               std::to_string(v.seq),
           0);
    }
    if (!v.payload.empty()) {
      Error e = decodeError(v.payload);
      ep_.markAborted(desc_.id, e);
      throw e;
    }
    return;
  }
  std::optional<Error> verdict;
  for (int r = 1; r < size(); ++r) {
    Frame hs = recvFrame(r, Lane::kCollective);
    if (verdict) continue;
    if (hs.opcode != Opcode::kHandshake || hs.seq != seq_) {
      verdict = Error(ErrorCode::kCollectiveMismatch,
                      "rank " + std::to_string(r) + " is at sequence " + std::to_string(hs.seq) + " (opcode " +
                          std::to_string(static_cast<int>(hs.opcode)) + "), rank 0 at " + std::to_string(seq_),
                      r);
      continue;
    }
    ByteReader br(hs.payload, ErrorCode::kProtocol);
    auto theirOp = static_cast<CollectiveOp>(br.u16());
    auto theirRoot = static_cast<int>(br.u32());
    if (theirOp != op) {
      verdict = Error(ErrorCode::kCollectiveMismatch,
                      "rank " + std::to_string(r) + " called collective " + std::to_string(static_cast<int>(theirOp)) +
                          ", rank 0 called " + std::to_string(static_cast<int>(op)),
                      r);
    } else if (theirRoot != root) {
      verdict = Error(ErrorCode::kRootMismatch,
                      "rank " + std::to_string(r) + " uses root " + std::to_string(theirRoot) + ", rank 0 uses root " +
                          std::to_string(root),
                      r);
    }
  }
  for (int r = 1; r < size(); ++r) {
    Frame v;
    v.seq = seq_;
    v.opcode = Opcode::kVerdict;
    if (verdict) v.payload = encodeError(*verdict);
    sendFrame(r, std::move(v));
  }
  if (verdict) {
    ep_.markAborted(desc_.id, *verdict);
    throw *verdict;
  }
}

void Communicator::abort(const Error& cause) {
  if (ep_.abortedError(desc_.id)) return;
  ep_.markAborted(desc_.id, cause);
  Frame f;
  f.commId = desc_.id;
  f.epoch = desc_.epoch;
  f.seq = seq_;
  f.opcode = Opcode::kAbort;
  f.channel = desc_.channel();
  f.payload = encodeError(cause);
  for (int r = 0; r < size(); ++r) {
    if (r == rank_) continue;
    try {
      ep_.send(desc_.members[r].key(), f);
    } catch (const Error&) {
    }
  }
}

namespace {

template <typename Fn>
auto guarded(Communicator& c, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kStaleEpoch && e.code() != ErrorCode::kCollectiveBusy) c.abort(e);
    throw;
  }
}

}  // namespace

void Communicator::barrier() {
  Scope scope(*this);
  guarded(*this, [&] { handshake(CollectiveOp::kBarrier, 0); });
}

std::string Communicator::bcastImpl(int root, std::string payload, bool tree) {
  int n = size();
  if (n == 1) return payload;
  if (!tree) {
    if (rank_ == root) {
      for (int r = 0; r < n; ++r) {
        if (r != root) sendData(r, payload);
      }
      return payload;
    }
    return recvData(root);
  }
  int vr = (rank_ - root + n) % n;
  int mask = 1;
  while (mask < n) {
    if (vr & mask) {
      payload = recvData((vr - mask + root) % n);
      break;
    }
    mask <<= 1;
  }
  mask >>= 1;
  while (mask > 0) {
    if (vr + mask < n) sendData((vr + mask + root) % n, payload);
    mask >>= 1;
  }
  return payload;
}

Value Communicator::reduceImpl(int root, const Value& v, const ReduceOp& op, bool tree) {
  int n = size();
  auto apply = [&](const Value& a, const Value& b) {
    try {
      return op(a, b);
    } catch (const Error& e) {
      throw Error(e.code(), "reduce operator failed on rank " + std::to_string(rank_) + ": " + e.what(), rank_);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kUserFunction, "reduce operator failed on rank " + std::to_string(rank_) + ": " + e.what(),
                  rank_);
    }
  };
  if (n == 1) return v;
  Value acc = v;
  if (!tree) {
    if (rank_ != root) {
      sendData(root, serializeValue(v));
      return Value::null();
    }
    std::vector<Value> all(n);
    for (int r = 0; r < n; ++r) all[r] = r == rank_ ? v : deserializeValue(recvData(r));
    acc = all[0];
    for (int r = 1; r < n; ++r) acc = apply(acc, all[r]);
    return acc;
  }
  // Binomial tree towards rank 0. Rank r accumulates the contiguous block
  // [r, r + mask) so the fold keeps rank order.
  for (int mask = 1; mask < n; mask <<= 1) {
    if (rank_ & mask) {
      sendData(rank_ - mask, serializeValue(acc));
      break;
    }
    if (rank_ + mask < n) acc = apply(acc, deserializeValue(recvData(rank_ + mask)));
  }
  if (root == 0) return rank_ == 0 ? acc : Value::null();
  if (rank_ == 0) sendData(root, serializeValue(acc));
  if (rank_ == root) return deserializeValue(recvData(0));
  return Value::null();
}

std::string Communicator::broadcast(int root, std::string payload) {
  Scope scope(*this);
  return guarded(*this, [&] {
    handshake(CollectiveOp::kBroadcast, root);
    return bcastImpl(root, std::move(payload), useTree(-1));
  });
}

std::string Communicator::scatter(int root, std::vector<std::string> parts) {
  Scope scope(*this);
  return guarded(*this, [&]() -> std::string {
    handshake(CollectiveOp::kScatter, root);
    if (rank_ == root) {
      if (static_cast<int>(parts.size()) != size()) {
        fail(ErrorCode::kPrecondition, "scatter root supplied " + std::to_string(parts.size()) + " parts for " +
                                           std::to_string(size()) + " members",
             rank_);
      }
      for (int r = 0; r < size(); ++r) {
        if (r != root) sendData(r, parts[r]);
      }
      return std::move(parts[root]);
    }
    return recvData(root);
  });
}

std::vector<std::string> Communicator::gather(int root, std::string payload) {
  Scope scope(*this);
  return guarded(*this, [&]() -> std::vector<std::string> {
    handshake(CollectiveOp::kGather, root);
    if (rank_ != root) {
      sendData(root, payload);
      return {};
    }
    std::vector<std::string> out(size());
    for (int r = 0; r < size(); ++r) out[r] = r == root ? std::move(payload) : recvData(r);
    return out;
  });
}

Value Communicator::reduce(int root, const Value& v, const ReduceOp& op, int tree) {
  Scope scope(*this);
  return guarded(*this, [&] {
    handshake(CollectiveOp::kReduce, root);
    return reduceImpl(root, v, op, useTree(tree));
  });
}

Value Communicator::allreduce(const Value& v, const ReduceOp& op, int tree) {
  Scope scope(*this);
  return guarded(*this, [&] {
    handshake(CollectiveOp::kAllreduce, 0);
    bool t = useTree(tree);
    Value r = reduceImpl(0, v, op, t);
    return deserializeValue(bcastImpl(0, rank_ == 0 ? serializeValue(r) : std::string(), t));
  });
}

std::vector<std::string> Communicator::alltoall(std::vector<std::string> outboxes) {
  Scope scope(*this);
  return guarded(*this, [&] {
    if (static_cast<int>(outboxes.size()) != size()) {
      fail(ErrorCode::kPrecondition, "alltoall needs " + std::to_string(size()) + " outboxes, got " +
                                         std::to_string(outboxes.size()),
           rank_);
    }
    handshake(CollectiveOp::kAlltoall, 0);
    std::vector<std::string> in(size());
    for (int k = 1; k < size(); ++k) {
      int to = (rank_ + k) % size();
      sendData(to, outboxes[to]);
    }
    in[rank_] = std::move(outboxes[rank_]);
    for (int k = 1; k < size(); ++k) {
      int from = (rank_ - k + size()) % size();
      in[from] = recvData(from);
    }
    return in;
  });
}

void Communicator::send(int toRank, std::string payload) {
  checkUsable();
  if (toRank < 0 || toRank >= size()) fail(ErrorCode::kPrecondition, "destination rank outside communicator");
  Frame f;
  f.opcode = Opcode::kPointToPoint;
  f.payload = std::move(payload);
  sendFrame(toRank, std::move(f));
}

std::string Communicator::recv(int fromRank) {
  checkUsable();
  if (fromRank < 0 || fromRank >= size()) fail(ErrorCode::kPrecondition, "source rank outside communicator");
  Frame f = recvFrame(fromRank, Lane::kPointToPoint);
  return std::move(f.payload);
}

}  // namespace ignis::comms
