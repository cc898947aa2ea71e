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

#include "ignis/driver/rpc.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <set>
#include <variant>

#include "ignis/driver/api.hpp"
#include "ignis/error.hpp"

namespace ignis::driver {

namespace {

// Socket helpers.

bool writeAll(int fd, const char* data, size_t n) {
  while (n > 0) {
    ssize_t w = ::send(fd, data, n, MSG_NOSIGNAL);
    if (w < 0 && errno == EINTR) continue;
    if (w <= 0) return false;
    data += w;
    n -= static_cast<size_t>(w);
  }
  return true;
}

bool readExact(int fd, char* data, size_t n) {
  while (n > 0) {
    ssize_t r = ::recv(fd, data, n, 0);
    if (r < 0 && errno == EINTR) continue;
    if (r <= 0) return false;
    data += r;
    n -= static_cast<size_t>(r);
  }
  return true;
}

bool writeFrame(int fd, const std::string& body) {
  auto n = static_cast<uint32_t>(body.size());
  char len[4] = {static_cast<char>(n & 0xff), static_cast<char>((n >> 8) & 0xff), static_cast<char>((n >> 16) & 0xff),
                 static_cast<char>((n >> 24) & 0xff)};
  return writeAll(fd, len, 4) && writeAll(fd, body.data(), body.size());
}

enum class ReadStatus { kOk, kClosed, kTooLarge };

ReadStatus readFrame(int fd, std::string& body) {
  unsigned char len[4];
  if (!readExact(fd, reinterpret_cast<char*>(len), 4)) return ReadStatus::kClosed;
  uint32_t n = len[0] | (len[1] << 8) | (len[2] << 16) | (static_cast<uint32_t>(len[3]) << 24);
  if (n > kRpcMaxBody) return ReadStatus::kTooLarge;
  body.resize(n);
  return readExact(fd, body.data(), n) ? ReadStatus::kOk : ReadStatus::kClosed;
}

std::string response(uint8_t status, const Value& payload) {
  std::string out(1, static_cast<char>(status));
  out += serializeValue(payload);
  return out;
}

std::string errorText(const Error& e) { return std::string(errorCodeName(e.code())) + ": " + e.what(); }

ErrorCode codeFromText(const std::string& text) {
  size_t colon = text.find(": ");
  if (colon == std::string::npos) return ErrorCode::kInternal;
  std::string name = text.substr(0, colon);
  for (int c = 1; c <= static_cast<int>(ErrorCode::kTimeout); ++c) {
    if (errorCodeName(static_cast<ErrorCode>(c)) == name) return static_cast<ErrorCode>(c);
  }
  return ErrorCode::kInternal;
}

// Server-side handle table and argument access.

using Object = std::variant<ICluster, IWorker, IDataFrame>;

struct Handles {
  std::map<int64_t, Object> objects;
  int64_t next = 1;

  Value add(Object o) {
    int64_t id = next++;
    objects.emplace(id, std::move(o));
    return Value::i64(id);
  }
  template <typename T>
  const T& get(const Value& id, const char* kind) {
    auto it = objects.find(id.asI64());
    if (it == objects.end() || !std::holds_alternative<T>(it->second)) {
      fail(ErrorCode::kPrecondition, "handle " + std::to_string(id.asI64()) + " is not a live " + kind);
    }
    return std::get<T>(it->second);
  }
};

class Call {
 public:
  Call(const RpcMethod& m, const ValueList& args, Handles& h) : m_(m), args_(args), h_(h) {}

  size_t size() const { return args_.size(); }
  const Value& at(size_t i) const {
    if (i >= args_.size()) fail(ErrorCode::kProtocol, std::string(m_.name) + ": missing argument " + std::to_string(i));
    return args_[i];
  }
  bool present(size_t i) const { return i < args_.size() && !args_[i].isNull(); }
  int64_t i64(size_t i) const { return at(i).asI64(); }
  int64_t i64Or(size_t i, int64_t fallback) const { return present(i) ? at(i).asI64() : fallback; }
  const std::string& str(size_t i) const { return at(i).asStr(); }
  const ICluster& cluster(size_t i) const { return h_.get<ICluster>(at(i), "cluster"); }
  const IWorker& worker(size_t i) const { return h_.get<IWorker>(at(i), "worker"); }
  const IDataFrame& df(size_t i) const { return h_.get<IDataFrame>(at(i), "dataframe"); }
  IDataFrame& mutableDf(size_t i) const { return const_cast<IDataFrame&>(df(i)); }

  /// Str(name or lambda) or Pair(Str, List[Pair(Str name, value)]).
  ISource source(size_t i) const {
    const Value& v = at(i);
    if (v.isStr()) return ISource(v.asStr());
    ISource s(v.first().asStr());
    for (const Value& kv : v.second().asList()) s.addParam(kv.first().asStr(), kv.second());
    return s;
  }
  IProperties props(size_t i) const { return present(i) ? IProperties(Properties::fromValue(at(i))) : IProperties(); }

  Value add(Object o) const { return h_.add(std::move(o)); }
  Value frame(IDataFrame d) const { return h_.add(std::move(d)); }
  Handles& handles() const { return h_; }

 private:
  const RpcMethod& m_;
  const ValueList& args_;
  Handles& h_;
};

Value values(const std::vector<Value>& v) { return Value::list(v); }

using Handler = std::function<Value(const Call&)>;

struct Entry {
  RpcMethod method;
  Handler handler;
};

const std::vector<Entry>& table() {
  static const std::vector<Entry> entries = [] {
    std::vector<Entry> t;
    auto add = [&](uint16_t id, const char* name, const char* sig, Handler h) { t.push_back({{id, name, sig}, std::move(h)}); };
    add(1, "Ignis.start", "(props?) -> Null", [](const Call& c) {
      Ignis::start(c.props(0));
      return Value::null();
    });
    add(2, "Ignis.stop", "() -> Null", [](const Call& c) {
      Ignis::stop();
      c.handles().objects.clear();
      return Value::null();
    });
    add(3, "Ignis.started", "() -> Bool", [](const Call&) { return Value::boolean(Ignis::started()); });

    add(10, "ICluster.new", "(props?) -> cluster", [](const Call& c) { return c.add(ICluster(c.props(0))); });

    add(20, "IWorker.new", "(cluster, namespace?) -> worker", [](const Call& c) {
      return c.add(IWorker(c.cluster(0), c.present(1) ? c.str(1) : "std"));
    });
    add(21, "IWorker.parallelize", "(worker, List values, partitions?) -> df", [](const Call& c) {
      return c.frame(c.worker(0).parallelize(c.at(1).asList(), c.i64Or(2, 0)));
    });
    add(22, "IWorker.textFile", "(worker, path, minPartitions?) -> df", [](const Call& c) {
      return c.frame(c.worker(0).textFile(c.str(1), c.i64Or(2, 0)));
    });
    add(23, "IWorker.partitionJsonFile", "(worker, path) -> df",
        [](const Call& c) { return c.frame(c.worker(0).partitionJsonFile(c.str(1))); });
    add(24, "IWorker.partitionObjectFile", "(worker, path) -> df",
        [](const Call& c) { return c.frame(c.worker(0).partitionObjectFile(c.str(1))); });
    add(25, "IWorker.loadLibrary", "(worker, library) -> Null", [](const Call& c) {
      c.worker(0).loadLibrary(c.str(1));
      return Value::null();
    });
    add(26, "IWorker.call", "(worker, source, df?) -> df", [](const Call& c) {
      return c.frame(c.present(2) ? c.worker(0).call(c.source(1), c.df(2)) : c.worker(0).call(c.source(1)));
    });
    add(27, "IWorker.voidCall", "(worker, source, df?) -> Null", [](const Call& c) {
      if (c.present(2)) {
        c.worker(0).voidCall(c.source(1), c.df(2));
      } else {
        c.worker(0).voidCall(c.source(1));
      }
      return Value::null();
    });
    add(28, "IWorker.importData", "(worker, df) -> df",
        [](const Call& c) { return c.frame(c.worker(0).importData(c.df(1))); });
    add(29, "IWorker.executors", "(worker) -> List[Pair(I64 rank, I64 pid)]", [](const Call& c) {
      ValueList out;
      for (const auto& e : c.worker(0).executors()) out.push_back(Value::pair(Value::i64(e.rank), Value::i64(e.pid)));
      return Value::list(std::move(out));
    });
    add(30, "IWorker.stop", "(worker) -> Null", [](const Call& c) {
      c.worker(0).stop();
      return Value::null();
    });

    auto fn1 = [&](uint16_t id, const char* name, IDataFrame (IDataFrame::*op)(const ISource&) const) {
      add(id, name, "(df, source) -> df", [op](const Call& c) { return c.frame((c.df(0).*op)(c.source(1))); });
    };
    fn1(40, "IDataFrame.map", &IDataFrame::map);
    fn1(41, "IDataFrame.filter", &IDataFrame::filter);
    fn1(42, "IDataFrame.flatmap", &IDataFrame::flatmap);
    fn1(43, "IDataFrame.keyBy", &IDataFrame::keyBy);
    fn1(44, "IDataFrame.mapPartitions", &IDataFrame::mapPartitions);
    add(45, "IDataFrame.keys", "(df) -> df", [](const Call& c) { return c.frame(c.df(0).keys()); });
    add(46, "IDataFrame.values", "(df) -> df", [](const Call& c) { return c.frame(c.df(0).values()); });
    fn1(47, "IDataFrame.mapValues", &IDataFrame::mapValues);

    add(50, "IDataFrame.groupBy", "(df, source, partitions?) -> df",
        [](const Call& c) { return c.frame(c.df(0).groupBy(c.source(1), c.i64Or(2, 0))); });
    add(51, "IDataFrame.groupByKey", "(df, partitions?) -> df",
        [](const Call& c) { return c.frame(c.df(0).groupByKey(c.i64Or(1, 0))); });
    add(52, "IDataFrame.sort", "(df, ascending?) -> df",
        [](const Call& c) { return c.frame(c.df(0).sort(!c.present(1) || c.at(1).asBool())); });
    add(53, "IDataFrame.sortBy", "(df, source, ascending?) -> df",
        [](const Call& c) { return c.frame(c.df(0).sortBy(c.source(1), !c.present(2) || c.at(2).asBool())); });
    add(54, "IDataFrame.sortByKey", "(df, ascending?) -> df",
        [](const Call& c) { return c.frame(c.df(0).sortByKey(!c.present(1) || c.at(1).asBool())); });

    add(60, "IDataFrame.reduce", "(df, source) -> value", [](const Call& c) { return c.df(0).reduce(c.source(1)); });
    add(61, "IDataFrame.treeReduce", "(df, source) -> value",
        [](const Call& c) { return c.df(0).treeReduce(c.source(1)); });
    add(62, "IDataFrame.aggregate", "(df, zero, seqOp, combOp) -> value",
        [](const Call& c) { return c.df(0).aggregate(c.at(1), c.source(2), c.source(3)); });
    add(63, "IDataFrame.treeAggregate", "(df, zero, seqOp, combOp) -> value",
        [](const Call& c) { return c.df(0).treeAggregate(c.at(1), c.source(2), c.source(3)); });
    add(64, "IDataFrame.fold", "(df, zero, source) -> value",
        [](const Call& c) { return c.df(0).fold(c.at(1), c.source(2)); });
    add(65, "IDataFrame.reduceByKey", "(df, source, partitions?) -> df",
        [](const Call& c) { return c.frame(c.df(0).reduceByKey(c.source(1), c.i64Or(2, 0))); });
    add(66, "IDataFrame.aggregateByKey", "(df, zero, seqOp, combOp, partitions?) -> df", [](const Call& c) {
      return c.frame(c.df(0).aggregateByKey(c.at(1), c.source(2), c.source(3), c.i64Or(4, 0)));
    });

    add(70, "IDataFrame.collect", "(df) -> List", [](const Call& c) { return values(c.df(0).collect()); });
    add(71, "IDataFrame.top", "(df, n, keySource?) -> List", [](const Call& c) {
      return values(c.present(2) ? c.df(0).top(c.i64(1), c.source(2)) : c.df(0).top(c.i64(1)));
    });
    add(72, "IDataFrame.take", "(df, n) -> List", [](const Call& c) { return values(c.df(0).take(c.i64(1))); });
    add(73, "IDataFrame.saveAsObjectFile", "(df, path) -> Str",
        [](const Call& c) { return Value::str(c.df(0).saveAsObjectFile(c.str(1))); });
    add(74, "IDataFrame.saveAsTextFile", "(df, path) -> Str",
        [](const Call& c) { return Value::str(c.df(0).saveAsTextFile(c.str(1))); });
    add(75, "IDataFrame.saveAsJsonFile", "(df, path) -> Str",
        [](const Call& c) { return Value::str(c.df(0).saveAsJsonFile(c.str(1))); });

    add(80, "IDataFrame.unionDataFrame", "(df, other) -> df",
        [](const Call& c) { return c.frame(c.df(0).unionDataFrame(c.df(1))); });
    add(81, "IDataFrame.join", "(df, other, partitions?) -> df",
        [](const Call& c) { return c.frame(c.df(0).join(c.df(1), c.i64Or(2, 0))); });
    add(82, "IDataFrame.distinct", "(df, partitions?) -> df",
        [](const Call& c) { return c.frame(c.df(0).distinct(c.i64Or(1, 0))); });

    add(90, "IDataFrame.sample", "(df, withReplacement, fraction, seed) -> df", [](const Call& c) {
      return c.frame(c.df(0).sample(c.at(1).asBool(), c.at(2).asF64(), c.i64(3)));
    });
    add(91, "IDataFrame.sampleByKey", "(df, withReplacement, fractions, seed) -> df", [](const Call& c) {
      return c.frame(c.df(0).sampleByKey(c.at(1).asBool(), c.at(2), c.i64(3)));
    });
    add(92, "IDataFrame.takeSample", "(df, withReplacement, n, seed) -> List", [](const Call& c) {
      return values(c.df(0).takeSample(c.at(1).asBool(), c.i64(2), c.i64(3)));
    });
    add(93, "IDataFrame.count", "(df) -> I64", [](const Call& c) { return Value::i64(c.df(0).count()); });
    add(94, "IDataFrame.max", "(df, keySource?) -> value",
        [](const Call& c) { return c.present(1) ? c.df(0).max(c.source(1)) : c.df(0).max(); });
    add(95, "IDataFrame.min", "(df, keySource?) -> value",
        [](const Call& c) { return c.present(1) ? c.df(0).min(c.source(1)) : c.df(0).min(); });
    add(96, "IDataFrame.countByKey", "(df) -> df", [](const Call& c) { return c.frame(c.df(0).countByKey()); });
    add(97, "IDataFrame.countByValue", "(df) -> df", [](const Call& c) { return c.frame(c.df(0).countByValue()); });

    add(100, "IDataFrame.repartition", "(df, partitions) -> df",
        [](const Call& c) { return c.frame(c.df(0).repartition(c.i64(1))); });
    add(101, "IDataFrame.partitionBy", "(df, partitions, source?) -> df", [](const Call& c) {
      return c.frame(c.present(2) ? c.df(0).partitionBy(c.i64(1), c.source(2)) : c.df(0).partitionBy(c.i64(1)));
    });

    add(110, "IDataFrame.persist", "(df, List[I64 tier, I64 level, Str dir]) -> df", [](const Call& c) {
      c.mutableDf(0).persist(storage::StoreKind::fromValue(c.at(1)));
      return c.at(0);
    });
    add(111, "IDataFrame.cache", "(df) -> df", [](const Call& c) {
      c.mutableDf(0).cache();
      return c.at(0);
    });
    add(112, "IDataFrame.unpersist", "(df) -> df", [](const Call& c) {
      c.mutableDf(0).unpersist();
      return c.at(0);
    });
    add(113, "IDataFrame.uncache", "(df) -> df", [](const Call& c) {
      c.mutableDf(0).uncache();
      return c.at(0);
    });

    add(120, "IDataFrame.iterate", "(df, source, state, maxIterations?) -> df",
        [](const Call& c) { return c.frame(c.df(0).iterate(c.source(1), c.at(2), c.i64Or(3, -1))); });
    add(121, "IDataFrame.iterationResult",
        "(df) -> List[state, I64 iterations, Bool converged, List[List[I64 pid]]]", [](const Call& c) {
          IterationResult r = c.df(0).iterationResult();
          ValueList pids;
          for (const auto& round : r.pids) {
            ValueList row;
            for (int64_t p : round) row.push_back(Value::i64(p));
            pids.push_back(Value::list(std::move(row)));
          }
          return Value::list({r.state, Value::i64(r.iterations), Value::boolean(r.converged), Value::list(std::move(pids))});
        });
    return t;
  }();
  return entries;
}

const Entry* findEntry(uint16_t id) {
  for (const Entry& e : table()) {
    if (e.method.id == id) return &e;
  }
  return nullptr;
}

}  // namespace

const std::vector<RpcMethod>& rpcMethods() {
  static const std::vector<RpcMethod> methods = [] {
    std::vector<RpcMethod> out;
    for (const Entry& e : table()) out.push_back(e.method);
    return out;
  }();
  return methods;
}

uint16_t rpcMethodId(const std::string& name) {
  for (const RpcMethod& m : rpcMethods()) {
    if (name == m.name) return m.id;
  }
  return 0;
}

// Server.

struct RpcServer::State {
  int listenFd = -1;
  uint16_t port = 0;
  std::atomic<bool> stopping{false};
  std::thread acceptor;
  std::thread runner;

  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::packaged_task<std::string()>> queue;
  std::set<int> connections;
  std::vector<std::thread> readers;
  Handles handles;

  std::string execute(const std::string& body) {
    if (body.size() < 2) return response(1, Value::str("protocol: request shorter than a method id"));
    uint16_t id = static_cast<uint8_t>(body[0]) | (static_cast<uint8_t>(body[1]) << 8);
    const Entry* entry = findEntry(id);
    if (!entry) return response(1, Value::str("protocol: unknown method id " + std::to_string(id)));
    try {
      Value args = deserializeValue(std::string_view(body).substr(2));
      if (!args.isList()) fail(ErrorCode::kProtocol, "arguments must be a List");
      Call call(entry->method, args.asList(), handles);
      return response(0, entry->handler(call));
    } catch (const Error& e) {
      return response(1, Value::str(errorText(e)));
    } catch (const std::exception& e) {
      return response(1, Value::str(std::string("internal: ") + e.what()));
    }
  }

  std::string submit(std::string body) {
    std::packaged_task<std::string()> task([this, b = std::move(body)] { return execute(b); });
    std::future<std::string> result = task.get_future();
    {
      std::lock_guard<std::mutex> lock(mu);
      queue.push_back(std::move(task));
    }
    cv.notify_one();
    return result.get();
  }

  void runLoop() {
    while (true) {
      std::packaged_task<std::string()> task;
      {
        std::unique_lock<std::mutex> lock(mu);
        cv.wait(lock, [&] { return stopping || !queue.empty(); });
        if (queue.empty()) return;
        task = std::move(queue.front());
        queue.pop_front();
      }
      task();
    }
  }

  void serve(int fd) {
    std::string body;
    bool ok = readFrame(fd, body) == ReadStatus::kOk;
    if (ok) {
      bool magic = body.size() == 5 && std::memcmp(body.data(), kRpcMagic, 4) == 0;
      if (!magic) {
        writeFrame(fd, response(1, Value::str("protocol: bad handshake")));
        ok = false;
      } else if (static_cast<uint8_t>(body[4]) != kRpcVersion) {
        writeFrame(fd, response(1, Value::str("protocol: unsupported protocol version " +
                                              std::to_string(static_cast<uint8_t>(body[4])) + ", server speaks " +
                                              std::to_string(kRpcVersion))));
        ok = false;
      } else {
        ok = writeFrame(fd, response(0, Value::i64(kRpcVersion)));
      }
    }
    while (ok && !stopping) {
      ReadStatus st = readFrame(fd, body);
      if (st == ReadStatus::kTooLarge) {
        writeFrame(fd, response(1, Value::str("protocol: frame exceeds the size limit")));
        break;
      }
      if (st != ReadStatus::kOk) break;
      ok = writeFrame(fd, submit(body));
    }
    std::lock_guard<std::mutex> lock(mu);
    if (connections.erase(fd)) ::close(fd);
  }

  void acceptLoop() {
    while (!stopping) {
      pollfd p{listenFd, POLLIN, 0};
      int r = ::poll(&p, 1, 100);
      if (r <= 0) continue;
      int fd = ::accept(listenFd, nullptr, nullptr);
      if (fd < 0) continue;
      int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      std::lock_guard<std::mutex> lock(mu);
      if (stopping) {
        ::close(fd);
        break;
      }
      connections.insert(fd);
      readers.emplace_back([this, fd] { serve(fd); });
    }
  }

  void stop() {
    if (stopping.exchange(true)) return;
    cv.notify_all();
    if (acceptor.joinable()) acceptor.join();
    {
      std::lock_guard<std::mutex> lock(mu);
      for (int fd : connections) ::shutdown(fd, SHUT_RDWR);
    }
    for (std::thread& t : readers) t.join();
    if (runner.joinable()) runner.join();
    ::close(listenFd);
  }
};

RpcServer::RpcServer(uint16_t port, const std::string& host) : state_(std::make_shared<State>()) {
  int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd < 0) fail(ErrorCode::kBindFailure, std::string("socket: ") + std::strerror(errno));
  int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd);
    fail(ErrorCode::kBindFailure, "bad listen address " + host);
  }
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(fd, 64) != 0) {
    std::string why = std::strerror(errno);
    ::close(fd);
    fail(ErrorCode::kBindFailure, "cannot listen on " + host + ":" + std::to_string(port) + ": " + why);
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  state_->listenFd = fd;
  state_->port = ntohs(addr.sin_port);
  State* s = state_.get();
  state_->runner = std::thread([s] { s->runLoop(); });
  state_->acceptor = std::thread([s] { s->acceptLoop(); });
}

RpcServer::~RpcServer() { stop(); }

uint16_t RpcServer::port() const { return state_->port; }

void RpcServer::stop() { state_->stop(); }

// Client.

RpcClient RpcClient::connect(const std::string& host, uint16_t port, uint8_t version) {
  int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd < 0) fail(ErrorCode::kIo, std::string("socket: ") + std::strerror(errno));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1 ||
      ::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    std::string why = std::strerror(errno);
    ::close(fd);
    fail(ErrorCode::kIo, "cannot connect to " + host + ":" + std::to_string(port) + ": " + why);
  }
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  RpcClient client(fd);
  std::string hello(kRpcMagic, 4);
  hello.push_back(static_cast<char>(version));
  auto [status, payload] = client.exchange(hello);
  if (status != 0) fail(ErrorCode::kProtocol, payload.isStr() ? payload.asStr() : "handshake rejected");
  return client;
}

RpcClient::RpcClient(RpcClient&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

RpcClient& RpcClient::operator=(RpcClient&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

RpcClient::~RpcClient() { close(); }

void RpcClient::close() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

std::pair<uint8_t, Value> RpcClient::exchange(const std::string& body) {
  if (fd_ < 0) fail(ErrorCode::kIo, "connection is closed");
  std::string reply;
  if (!writeFrame(fd_, body) || readFrame(fd_, reply) != ReadStatus::kOk || reply.empty()) {
    close();
    fail(ErrorCode::kIo, "connection to the server was lost");
  }
  return {static_cast<uint8_t>(reply[0]), deserializeValue(std::string_view(reply).substr(1))};
}

Value RpcClient::invoke(uint16_t method, ValueList args) {
  std::string body;
  body.push_back(static_cast<char>(method & 0xff));
  body.push_back(static_cast<char>(method >> 8));
  body += serializeValue(Value::list(std::move(args)));
  auto [status, payload] = exchange(body);
  if (status == 0) return payload;
  std::string text = payload.isStr() ? payload.asStr() : payload.toString();
  ErrorCode code = codeFromText(text);
  size_t colon = text.find(": ");
  throw Error(code, code != ErrorCode::kInternal && colon != std::string::npos ? text.substr(colon + 2) : text);
}

Value RpcClient::invoke(const std::string& method, ValueList args) {
  uint16_t id = rpcMethodId(method);
  if (id == 0) fail(ErrorCode::kProtocol, "unknown method " + method);
  return invoke(id, std::move(args));
}

}  // namespace ignis::driver
