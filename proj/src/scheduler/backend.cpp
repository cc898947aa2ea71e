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

#include "ignis/scheduler/backend.hpp"

#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <cstring>
#include <filesystem>

#include "ignis/executor/ops.hpp"

extern char** environ;

namespace ignis::scheduler {

namespace fs = std::filesystem;
using executor::Args;
using executor::OpSpec;
using Clock = std::chrono::steady_clock;

namespace {

constexpr int kPollMs = 100;
constexpr int kShutdownGraceMs = 3000;

/// Raised inside the control thread when executor processes died.
struct ExecutorLost {
  std::string worker;
  std::vector<int> ranks;
  Error cause;
};

bool isReadiness(const TaskNode& n) { return n.kind == TaskKind::kContainer || n.kind == TaskKind::kExecutor; }

bool isSource(const std::string& op) {
  return op == "parallelize" || op == "textFile" || op == "partitionJsonFile" || op == "partitionObjectFile";
}

bool isGatherAction(const std::string& op) {
  return op == "collect" || op == "take" || op == "top" || op == "takeSample";
}

/// Operator name understood by the executors.
std::string execName(const std::string& op) {
  if (op == "treeReduce") return "reduce";
  if (op == "treeAggregate") return "aggregate";
  if (op == "sort" || op == "sortByKey") return "sortBy";
  return op;
}

std::string newJobId() {
  if (const char* env = std::getenv("IGNIS_JOB_ID"); env && *env) return env;
  static std::atomic<int> counter{0};
  return "job-" + std::to_string(::getpid()) + "-" + std::to_string(counter.fetch_add(1));
}

bool reapNoHang(pid_t pid) {
  int status = 0;
  pid_t r = ::waitpid(pid, &status, WNOHANG);
  return r == pid || (r < 0 && errno == ECHILD);
}

void reapWithin(pid_t pid, int timeoutMs) {
  auto deadline = Clock::now() + std::chrono::milliseconds(timeoutMs);
  while (Clock::now() < deadline) {
    if (reapNoHang(pid)) return;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  ::kill(pid, SIGKILL);
  ::waitpid(pid, nullptr, 0);
}

}  // namespace

struct Backend::Exec {
  int rank = 0;
  pid_t pid = 0;
  comms::ProcessAddr addr;
  std::string key;
  bool registered = false;
  bool dead = true;
};

struct Backend::Worker {
  WorkerDesc desc;
  Properties props;
  std::vector<Exec> execs;
  comms::CommDesc base;
  bool baseIssued = false;
  std::unique_ptr<comms::Communicator> driver;
  std::vector<std::string> libraries;
  int64_t containerNode = 0;
  int64_t executorNode = 0;
};

struct Backend::Stage {
  std::string worker;
  std::vector<int64_t> nodes;
  OpSpec base;
  std::vector<OpSpec> chain;
  bool import = false;

  int64_t output() const { return nodes.back(); }
};

struct Backend::Attempt {
  int number = 0;
  int stageIndex = 0;
  /// Transforms run in the current attempt.
  std::set<int64_t> executed;
  /// Tasks whose re-execution counts as recomputation.
  std::set<int64_t> recomputable;
  /// Unpersisted stage outputs to free when the action ends.
  std::vector<int64_t> transient;
};

template <class F>
auto Backend::post(F&& fn) -> decltype(fn()) {
  using R = decltype(fn());
  if (std::this_thread::get_id() == controlId_) return fn();
  auto task = std::make_shared<std::packaged_task<R()>>(std::forward<F>(fn));
  auto result = task->get_future();
  {
    std::lock_guard<std::mutex> lock(queueMu_);
    if (stopping_) fail(ErrorCode::kInvalidSession, "the session is stopped");
    queue_.push_back([task] { (*task)(); });
  }
  queueCv_.notify_one();
  return result.get();
}

Backend::Backend(Properties props) : props_(std::move(props)), jobId_(newJobId()) {
  diskRoot_ = (fs::path(props_.get(props::kPartitionDiskDir)) / jobId_).string();
  comms::Endpoint::Options o;
  o.host = props_.get(props::kTransportHost);
  o.port = takePort(props_);
  o.connectTimeoutMs = static_cast<int>(props_.getInt(props::kTransportConnectTimeout));
  ep_ = std::make_unique<comms::Endpoint>(o);
  std::promise<void> started;
  control_ = std::thread([this, &started] {
    controlId_ = std::this_thread::get_id();
    started.set_value();
    controlLoop();
  });
  started.get_future().wait();
  heartbeat_ = std::thread([this] { heartbeatLoop(); });
}

Backend::~Backend() {
  try {
    stop();
  } catch (...) {
  }
}

bool Backend::running() const {
  std::lock_guard<std::mutex> lock(queueMu_);
  return !stopping_;
}

void Backend::stop() {
  {
    std::lock_guard<std::mutex> lock(queueMu_);
    if (stopping_) return;
  }
  try {
    post([this] {
      for (auto& [id, w] : workers_) shutdownWorker(*w);
      workers_.clear();
      return 0;
    });
  } catch (...) {
  }
  {
    std::lock_guard<std::mutex> lock(queueMu_);
    stopping_ = true;
  }
  queueCv_.notify_all();
  if (control_.joinable()) control_.join();
  {
    std::lock_guard<std::mutex> lock(procMu_);
    heartbeatStop_ = true;
  }
  procCv_.notify_all();
  if (heartbeat_.joinable()) heartbeat_.join();
  ep_->close();
  std::error_code ec;
  fs::remove_all(diskRoot_, ec);
  stopped_ = true;
}

void Backend::controlLoop() {
  while (true) {
    std::function<void()> fn;
    {
      std::unique_lock<std::mutex> lock(queueMu_);
      queueCv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
      if (queue_.empty()) return;
      fn = std::move(queue_.front());
      queue_.pop_front();
    }
    fn();
  }
}

void Backend::heartbeatLoop() {
  auto interval = std::chrono::milliseconds(std::max<int64_t>(1, props_.getInt(props::kHeartbeatInterval)));
  int64_t misses = std::max<int64_t>(1, props_.getInt(props::kHeartbeatMisses));
  std::unique_lock<std::mutex> lock(procMu_);
  while (!heartbeatStop_) {
    procCv_.wait_for(lock, interval);
    if (heartbeatStop_) break;
    std::vector<Watched> targets;
    for (const auto& [key, w] : watched_) targets.push_back(w);
    lock.unlock();
    auto now = Clock::now();
    std::vector<std::string> killed;
    for (const Watched& t : targets) {
      auto last = t.since;
      if (auto pong = ep_->lastPong(t.key); pong && *pong > last) last = *pong;
      if (now - last > interval * misses) {
        ::kill(t.pid, SIGKILL);
        ep_->markDead(t.key);
        killed.push_back(t.key);
        continue;
      }
      comms::Frame ping;
      ping.opcode = comms::Opcode::kPing;
      try {
        ep_->send(t.key, ping);
      } catch (const Error&) {
      }
    }
    lock.lock();
    for (const std::string& k : killed) watched_.erase(k);
  }
}

// Executor processes.

uint16_t Backend::takePort(const Properties& props) {
  std::vector<uint16_t> ports = props.getPorts(props::kTransportPorts);
  if (ports.empty()) return 0;
  for (uint16_t p : ports) {
    if (usedPorts_.insert(p).second) return p;
  }
  fail(ErrorCode::kResource, "no free port left in " + std::string(props::kTransportPorts));
}

void Backend::spawnExecutor(Worker& w, int rank) {
  Exec& e = w.execs[static_cast<size_t>(rank)];
  uint16_t port = takePort(w.props);
  std::string binary = w.props.get(props::kExecutorBinary);
  std::vector<std::string> args = {binary,
                                   "--driver",
                                   ep_->key(),
                                   "--worker",
                                   w.desc.id,
                                   "--rank",
                                   std::to_string(rank),
                                   "--host",
                                   w.props.get(props::kTransportHost),
                                   "--port",
                                   std::to_string(port),
                                   "--connect-timeout",
                                   w.props.get(props::kTransportConnectTimeout),
                                   "--parent",
                                   std::to_string(::getpid())};
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);
  pid_t pid = 0;
  int rc = ::posix_spawn(&pid, binary.c_str(), nullptr, nullptr, argv.data(), environ);
  if (rc != 0) fail(ErrorCode::kResource, "cannot start executor '" + binary + "': " + std::strerror(rc));
  e = Exec{};
  e.rank = rank;
  e.pid = pid;
  e.dead = false;
}

void Backend::awaitRegistrations(Worker& w, const std::vector<int>& ranks) {
  std::set<int> pending(ranks.begin(), ranks.end());
  int64_t timeoutMs = std::max<int64_t>(10000, w.props.getInt(props::kTransportConnectTimeout));
  auto deadline = Clock::now() + std::chrono::milliseconds(timeoutMs);
  while (!pending.empty()) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
    if (left <= 0) {
      for (int r : pending) killExec(w.execs[static_cast<size_t>(r)]);
      fail(ErrorCode::kConnectTimeout, "executor " + std::to_string(*pending.begin()) + " of worker " + w.desc.id +
                                           " did not register within " + std::to_string(timeoutMs) + " ms");
    }
    std::pair<std::string, comms::Frame> msg;
    try {
      msg = ep_->recvAny(comms::Lane::kRegister, static_cast<int>(std::min<int64_t>(left, kPollMs)));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kTimeout) throw;
      for (int r : pending) {
        Exec& ex = w.execs[static_cast<size_t>(r)];
        if (reapNoHang(ex.pid)) {
          ex.dead = true;
          fail(ErrorCode::kResource,
               "executor " + std::to_string(r) + " of worker " + w.desc.id + " exited during startup");
        }
      }
      continue;
    }
    executor::Registration reg;
    try {
      reg = executor::Registration::fromValue(deserializeValue(msg.second.payload));
    } catch (const Error&) {
      continue;
    }
    if (reg.workerId != w.desc.id || !pending.count(reg.rank)) continue;
    Exec& ex = w.execs[static_cast<size_t>(reg.rank)];
    if (reg.pid != ex.pid) continue;
    ex.addr = comms::ProcessAddr{reg.host, reg.port, w.desc.id, reg.rank};
    ex.key = ex.addr.key();
    ex.registered = true;
    pending.erase(reg.rank);
    std::lock_guard<std::mutex> lock(procMu_);
    watched_[ex.key] = Watched{ex.pid, ex.key, Clock::now()};
  }
}

bool Backend::alive(Exec& e) {
  if (e.dead) return false;
  if (reapNoHang(e.pid)) {
    e.dead = true;
  } else if (e.registered && ep_->isDead(e.key)) {
    ::kill(e.pid, SIGKILL);
    ::waitpid(e.pid, nullptr, 0);
    e.dead = true;
  }
  if (!e.dead) return true;
  if (e.registered) {
    ep_->markDead(e.key);
    std::lock_guard<std::mutex> lock(procMu_);
    watched_.erase(e.key);
  }
  return false;
}

void Backend::killExec(Exec& e) {
  if (!e.dead) {
    ::kill(e.pid, SIGKILL);
    ::waitpid(e.pid, nullptr, 0);
    e.dead = true;
  }
  if (e.registered) {
    ep_->markDead(e.key);
    std::lock_guard<std::mutex> lock(procMu_);
    watched_.erase(e.key);
  }
}

void Backend::shutdownWorker(Worker& w) {
  w.driver.reset();
  std::vector<Call> calls;
  for (Exec& e : w.execs) {
    if (e.registered && alive(e)) calls.push_back(send(w, e.rank, executor::cmd::kShutdown, Args()));
  }
  auto deadline = Clock::now() + std::chrono::milliseconds(kShutdownGraceMs);
  for (Call& c : calls) {
    Exec& e = w.execs[static_cast<size_t>(c.rank)];
    while (!c.error && Clock::now() < deadline) {
      try {
        comms::Frame f = ep_->recv(0, e.key, comms::Lane::kControl, kPollMs);
        if (f.seq == c.seq) break;
      } catch (const Error& err) {
        if (err.code() != ErrorCode::kTimeout) break;
      }
    }
  }
  for (Exec& e : w.execs) {
    if (!e.dead) {
      auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
      reapWithin(e.pid, static_cast<int>(std::max<int64_t>(left, 100)));
      e.dead = true;
    }
    if (e.registered) {
      ep_->markDead(e.key);
      std::lock_guard<std::mutex> lock(procMu_);
      watched_.erase(e.key);
    }
  }
}

// Commands.

Backend::Call Backend::send(Worker& w, int rank, const std::string& cmd, const Args& args) {
  Call c;
  c.worker = &w;
  c.rank = rank;
  c.seq = nextSeq_++;
  Exec& e = w.execs[static_cast<size_t>(rank)];
  comms::Frame f;
  f.opcode = comms::Opcode::kControl;
  f.seq = c.seq;
  f.payload = serializeValue(Value::pair(Value::str(cmd), args.toValue()));
  try {
    if (!alive(e)) fail(ErrorCode::kPeerLost, "executor " + std::to_string(rank) + " of worker " + w.desc.id + " is lost");
    ep_->send(e.key, f);
  } catch (const Error& err) {
    c.error = Error(err.code(), err.what(), rank);
  }
  return c;
}

void Backend::await(Call& c) {
  if (c.error) return;
  Exec& e = c.worker->execs[static_cast<size_t>(c.rank)];
  while (true) {
    comms::Frame f;
    try {
      f = ep_->recv(0, e.key, comms::Lane::kControl, kPollMs);
    } catch (const Error& err) {
      if (err.code() == ErrorCode::kTimeout && alive(e)) continue;
      c.error = Error(ErrorCode::kPeerLost,
                      "executor " + std::to_string(c.rank) + " of worker " + c.worker->desc.id + " is lost", c.rank);
      return;
    }
    if (f.opcode != comms::Opcode::kReply || f.seq != c.seq) continue;
    try {
      c.reply = executor::unwrapReply(deserializeValue(f.payload));
    } catch (const Error& err) {
      c.error = err;
    }
    return;
  }
}

std::vector<Value> Backend::finish(std::vector<Call>& calls, const std::optional<Error>& driverError) {
  for (Call& c : calls) await(c);
  std::vector<Worker*> involved;
  for (Call& c : calls) {
    if (std::find(involved.begin(), involved.end(), c.worker) == involved.end()) involved.push_back(c.worker);
  }
  std::optional<Error> best;
  auto consider = [&best](const Error& e) {
    bool comm = e.code() == ErrorCode::kPeerLost || e.code() == ErrorCode::kStaleEpoch;
    if (!best || (!comm && (best->code() == ErrorCode::kPeerLost || best->code() == ErrorCode::kStaleEpoch))) best = e;
  };
  for (Call& c : calls) {
    if (c.error) consider(*c.error);
  }
  if (driverError) consider(*driverError);
  for (Worker* w : involved) {
    std::vector<int> dead;
    for (Exec& e : w->execs) {
      if (!alive(e)) dead.push_back(e.rank);
    }
    if (!dead.empty()) {
      Error cause = best ? *best : Error(ErrorCode::kPeerLost, "executor lost", dead.front());
      if (cause.code() != ErrorCode::kPeerLost) {
        cause = Error(ErrorCode::kPeerLost,
                      "executor " + std::to_string(dead.front()) + " of worker " + w->desc.id + " is lost",
                      dead.front());
      }
      for (Worker* other : involved) {
        other->baseIssued = false;
        other->driver.reset();
      }
      throw ExecutorLost{w->desc.id, dead, cause};
    }
  }
  if (best) {
    for (Worker* w : involved) {
      w->baseIssued = false;
      w->driver.reset();
    }
    throw *best;
  }
  std::vector<Value> out;
  out.reserve(calls.size());
  for (Call& c : calls) out.push_back(std::move(c.reply));
  return out;
}

std::vector<Value> Backend::broadcast(Worker& w, const std::string& cmd, const Args& args) {
  std::vector<Call> calls;
  for (Exec& e : w.execs) calls.push_back(send(w, e.rank, cmd, args));
  return finish(calls, std::nullopt);
}

void Backend::ensureComms(Worker& w) {
  if (w.baseIssued) return;
  if (w.base.id == 0) {
    std::vector<comms::ProcessAddr> addrs;
    for (const Exec& e : w.execs) addrs.push_back(e.addr);
    w.base = comms::createBase(nextCommId_++, w.desc, std::move(addrs));
  } else {
    comms::CommDesc next = w.base;
    next.id = nextCommId_++;
    next.epoch = w.base.epoch + 1;
    next.replaces = w.base.id;
    w.base = std::move(next);
  }
  std::vector<Call> calls;
  for (Exec& e : w.execs) {
    Args a;
    a.set("role", Value::str("base")).set("desc", w.base.toValue()).set("rank", Value::i64(e.rank));
    calls.push_back(send(w, e.rank, executor::cmd::kCommCreate, a));
  }
  finish(calls, std::nullopt);
  w.baseIssued = true;
}

comms::Communicator& Backend::driverComm(Worker& w) {
  ensureComms(w);
  if (w.driver) return *w.driver;
  comms::ProcessAddr self{ep_->host(), ep_->port(), "driver", 0};
  comms::CommDesc desc = comms::attachDriver(nextCommId_++, w.base, self);
  std::vector<Call> calls;
  for (Exec& e : w.execs) {
    Args a;
    a.set("role", Value::str("driver")).set("desc", desc.toValue()).set("rank", Value::i64(e.rank + 1));
    calls.push_back(send(w, e.rank, executor::cmd::kCommCreate, a));
  }
  auto comm = std::make_unique<comms::Communicator>(*ep_, desc, 0);
  std::optional<Error> driverError;
  try {
    comm->open();
  } catch (const Error& e) {
    driverError = e;
  }
  finish(calls, driverError);
  w.driver = std::move(comm);
  return *w.driver;
}

void Backend::configure(Worker& w, const std::vector<int>& ranks) {
  Properties execProps = w.props;
  execProps.set(props::kPartitionDiskDir, (fs::path(diskRoot_) / w.desc.id / "spill").string());
  Args a;
  a.set("props", execProps.toValue())
      .set("job", Value::str(jobId_))
      .set("namespace", Value::str(w.desc.registryNamespace))
      .set("count", Value::i64(w.desc.executorCount));
  std::vector<Call> calls;
  for (int r : ranks) calls.push_back(send(w, r, executor::cmd::kConfigure, a));
  finish(calls, std::nullopt);
  for (const std::string& lib : w.libraries) {
    calls.clear();
    for (int r : ranks) calls.push_back(send(w, r, executor::cmd::kLibraryLoad, Args().set("name", Value::str(lib))));
    finish(calls, std::nullopt);
  }
}

// Public API.

std::string Backend::createCluster(const Properties& props) {
  return post([&] {
    for (const auto& [k, v] : props.entries()) {
      if (k.rfind(props::kDriverPrefix, 0) == 0) {
        fail(ErrorCode::kUsage, "property '" + k + "' can only be set at submission time");
      }
    }
    std::string id = "c" + std::to_string(nextCluster_++);
    clusters_[id] = props;
    return id;
  });
}

std::string Backend::createWorker(const std::string& cluster, const std::string& registryNamespace) {
  return post([&] {
    auto it = clusters_.find(cluster);
    if (it == clusters_.end()) fail(ErrorCode::kPrecondition, "unknown cluster '" + cluster + "'");
    auto w = std::make_unique<Worker>();
    w->props = props_;
    w->props.merge(it->second);
    int64_t n = w->props.getInt(props::kExecutorInstances);
    if (n < 1) fail(ErrorCode::kUsage, std::string(props::kExecutorInstances) + " must be at least 1");
    w->desc.id = "w" + std::to_string(nextWorker_++);
    w->desc.registryNamespace = registryNamespace;
    w->desc.executorCount = static_cast<int>(n);
    w->desc.sharedMode = w->props.getBool(props::kWorkerShared);
    w->execs.resize(static_cast<size_t>(n));
    std::vector<int> ranks;
    try {
      for (int r = 0; r < n; ++r) {
        spawnExecutor(*w, r);
        ranks.push_back(r);
      }
      awaitRegistrations(*w, ranks);
      configure(*w, ranks);
      ensureComms(*w);
    } catch (const ExecutorLost& lost) {
      shutdownWorker(*w);
      throw lost.cause;
    } catch (...) {
      shutdownWorker(*w);
      throw;
    }
    std::string id = w->desc.id;
    w->containerNode = graph_.record(TaskKind::kContainer, "container", Args(), {}, id);
    w->executorNode = graph_.record(TaskKind::kExecutor, "executor", Args(), {w->containerNode}, id);
    workers_[id] = std::move(w);
    return id;
  });
}

void Backend::destroyWorker(const std::string& id) {
  post([&] {
    Worker& w = worker(id);
    shutdownWorker(w);
    workers_.erase(id);
    return 0;
  });
}

void Backend::loadLibrary(const std::string& id, const std::string& library) {
  post([&] {
    Worker& w = worker(id);
    try {
      broadcast(w, executor::cmd::kLibraryLoad, Args().set("name", Value::str(library)));
    } catch (const ExecutorLost& lost) {
      throw lost.cause;
    }
    w.libraries.push_back(library);
    return 0;
  });
}

Backend::Worker& Backend::worker(const std::string& id) {
  auto it = workers_.find(id);
  if (it == workers_.end()) fail(ErrorCode::kPrecondition, "worker '" + id + "' does not exist or was stopped");
  return *it->second;
}

int64_t Backend::readinessNode(const std::string& id) {
  return post([&] { return worker(id).executorNode; });
}

int64_t Backend::record(TaskKind kind, const std::string& op, Args params, std::vector<int64_t> deps,
                        const std::string& workerId, std::shared_ptr<const std::vector<Value>> data) {
  return post([&] {
    worker(workerId);
    for (int64_t d : deps) {
      if (!graph_.contains(d)) fail(ErrorCode::kUnknownDependency, "unknown task dependency " + std::to_string(d));
      const TaskNode& dep = graph_.node(d);
      if (kind == TaskKind::kImport) {
        if (dep.worker == workerId) fail(ErrorCode::kSameWorker, "cannot import a dataframe into its own worker");
      } else if (dep.worker != workerId) {
        fail(ErrorCode::kPrecondition, "dataframes of workers " + dep.worker + " and " + workerId +
                                           " cannot be combined; import one of them first");
      }
    }
    int64_t id = graph_.record(kind, op, std::move(params), std::move(deps), workerId);
    graph_.node(id).driverData = std::move(data);
    return id;
  });
}

Value Backend::run(int64_t action) {
  return post([&] { return runAction(action); });
}

void Backend::persist(int64_t id, std::optional<storage::StoreKind> tier) {
  post([&] {
    TaskNode& n = graph_.node(id);
    if (n.kind != TaskKind::kTransform && n.kind != TaskKind::kImport) {
      fail(ErrorCode::kPrecondition, "only dataframes can be persisted");
    }
    if (n.persist == tier) return 0;
    if (n.materialized) {
      bool disk = n.persistedOutput && n.persist && n.persist->tier == storage::StoreKind::Tier::kDisk;
      auto it = workers_.find(n.worker);
      if (it != workers_.end()) {
        Args a;
        a.set("ids", Value::list({Value::i64(id)})).set("dropFiles", Value::boolean(true));
        if (disk) a.set("dir", Value::str(persistTarget(n)->dir));
        try {
          broadcast(*it->second, executor::cmd::kFree, a);
        } catch (const ExecutorLost&) {
        }
      }
      n.materialized = false;
      n.persistedOutput = false;
      n.state = TaskState::kPending;
    }
    n.persist = tier;
    return 0;
  });
}

std::string Backend::workerOf(int64_t id) {
  return post([&] { return graph_.node(id).worker; });
}

Value Backend::nodeResult(int64_t id) {
  return post([&] { return graph_.node(id).result; });
}

std::string Backend::dumpGraph() {
  return post([&] { return graph_.dump(); });
}

int64_t Backend::execCount(int64_t id) {
  return post([&] { return graph_.node(id).execCount; });
}

int64_t Backend::taskExecutions() {
  return post([&] {
    int64_t total = 0;
    for (size_t id = 1; id <= graph_.size(); ++id) total += graph_.node(static_cast<int64_t>(id)).execCount;
    return total;
  });
}

std::vector<int64_t> Backend::elementsPerExecutor(int64_t id) {
  return post([&] { return graph_.node(id).countPerRank; });
}

RecoveryStats Backend::recoveryStats() {
  return post([&] { return stats_; });
}

std::vector<ExecutorInfo> Backend::executors(const std::string& id) {
  return post([&] {
    std::vector<ExecutorInfo> out;
    for (const Exec& e : worker(id).execs) out.push_back({e.rank, e.pid, e.key});
    return out;
  });
}

Value Backend::metrics(const std::string& id) {
  return post([&] {
    std::vector<Value> replies;
    try {
      replies = broadcast(worker(id), executor::cmd::kMetrics, Args());
    } catch (const ExecutorLost& lost) {
      throw lost.cause;
    }
    std::map<std::string, int64_t> sums;
    for (const Value& r : replies) {
      Args a = Args::fromValue(r);
      for (const auto& [k, v] : a.entries()) {
        if (k != "pid") sums[k] += v.asI64();
      }
    }
    Args out;
    for (const auto& [k, v] : sums) out.set(k, Value::i64(v));
    return out.toValue();
  });
}

void Backend::setStageHook(std::function<void(const StageEvent&)> hook) {
  post([&] {
    hook_ = std::move(hook);
    return 0;
  });
}

// Execution.

std::optional<storage::StoreKind> Backend::persistTarget(const TaskNode& n) const {
  if (!n.persist) return std::nullopt;
  storage::StoreKind kind = *n.persist;
  if (kind.tier == storage::StoreKind::Tier::kDisk) {
    kind.dir = (fs::path(diskRoot_) / n.worker / ("t" + std::to_string(n.id))).string();
  }
  return kind;
}

void Backend::markExecuted(TaskNode& n, Attempt& attempt) {
  ++n.execCount;
  n.state = TaskState::kRunning;
  if (isReadiness(n)) return;
  attempt.executed.insert(n.id);
  if (attempt.recomputable.erase(n.id)) ++stats_.recomputedTasks;
}

void Backend::freeOutputs(Worker& w, const std::vector<int64_t>& ids, bool dropFiles) {
  if (ids.empty()) return;
  ValueList list;
  for (int64_t id : ids) list.push_back(Value::i64(id));
  Args a;
  a.set("ids", Value::list(std::move(list))).set("dropFiles", Value::boolean(dropFiles));
  broadcast(w, executor::cmd::kFree, a);
}

Value Backend::runAction(int64_t action) {
  TaskNode& target = graph_.node(action);
  if (target.kind != TaskKind::kAction) fail(ErrorCode::kPrecondition, "task " + std::to_string(action) + " is not an action");
  int64_t budget = props_.getInt(props::kRecoveryAttempts);
  int64_t recoveries = 0;
  std::optional<Error> original;
  Attempt attempt;
  auto releaseTransient = [&] {
    std::map<std::string, std::vector<int64_t>> byWorker;
    for (int64_t id : attempt.transient) {
      TaskNode& n = graph_.node(id);
      if (!n.materialized || n.persistedOutput) continue;
      n.materialized = false;
      if (workers_.count(n.worker)) byWorker[n.worker].push_back(id);
    }
    attempt.transient.clear();
    for (auto& [wid, ids] : byWorker) {
      try {
        freeOutputs(worker(wid), ids, false);
      } catch (const ExecutorLost&) {
      } catch (const Error&) {
      }
    }
  };
  while (true) {
    try {
      Value v = attemptAction(action, attempt);
      releaseTransient();
      return v;
    } catch (ExecutorLost lost) {
      if (!original) original = lost.cause;
      ++stats_.failures;
      bool recovered = false;
      while (!recovered) {
        if (recoveries >= budget) {
          target.state = TaskState::kFailed;
          releaseTransient();
          throw Error(ErrorCode::kRecoveryExhausted,
                      "action failed after " + std::to_string(budget) + " recovery attempts: " + original->what(),
                      original->rank());
        }
        ++recoveries;
        try {
          recover(lost.worker, lost.ranks, attempt);
          recovered = true;
        } catch (const ExecutorLost& again) {
          lost = again;
          ++stats_.failures;
        }
      }
      ++attempt.number;
    } catch (const Error&) {
      target.state = TaskState::kFailed;
      releaseTransient();
      throw;
    }
  }
}

Value Backend::attemptAction(int64_t action, Attempt& attempt) {
  attempt.executed.clear();
  attempt.stageIndex = 0;
  std::vector<int64_t> plan = graph_.plan(action);
  // Liveness first, so that lost executors are replaced before any work.
  for (int64_t id : plan) {
    TaskNode& n = graph_.node(id);
    if (isReadiness(n)) checkReady(worker(n.worker), n);
  }
  std::vector<Stage> stages = buildStages(plan, action);
  for (Stage& s : stages) {
    if (s.import) {
      runImport(s, attempt);
    } else {
      runStage(s, attempt);
    }
    ++attempt.stageIndex;
  }
  return runActionNode(graph_.node(action), attempt);
}

void Backend::checkReady(Worker& w, TaskNode& n) {
  Attempt unused;
  markExecuted(n, unused);
  if (n.kind == TaskKind::kContainer) {
    std::vector<int> dead;
    for (Exec& e : w.execs) {
      if (!alive(e)) dead.push_back(e.rank);
    }
    if (!dead.empty()) {
      n.state = TaskState::kFailed;
      w.baseIssued = false;
      w.driver.reset();
      throw ExecutorLost{w.desc.id, dead,
                         Error(ErrorCode::kPeerLost,
                               "executor " + std::to_string(dead.front()) + " of worker " + w.desc.id + " is lost",
                               dead.front())};
    }
  } else {
    ensureComms(w);
    broadcast(w, executor::cmd::kPing, Args());
  }
  n.state = TaskState::kDone;
}

std::vector<Backend::Stage> Backend::buildStages(const std::vector<int64_t>& plan, int64_t action) {
  std::set<int64_t> pending;
  for (int64_t id : plan) {
    const TaskNode& n = graph_.node(id);
    if (!isReadiness(n) && id != action) pending.insert(id);
  }
  std::map<int64_t, int> consumers;
  for (int64_t id : plan) {
    for (int64_t d : graph_.node(id).deps) {
      if (pending.count(d)) ++consumers[d];
    }
  }
  std::vector<Stage> stages;
  std::map<int64_t, size_t> stageOf;
  for (int64_t id : pending) {
    const TaskNode& n = graph_.node(id);
    if (n.kind == TaskKind::kImport) {
      Stage s;
      s.worker = n.worker;
      s.nodes = {id};
      s.import = true;
      stages.push_back(std::move(s));
      continue;
    }
    OpSpec spec{execName(n.op), n.params};
    if (executor::isNarrowOp(n.op) && n.deps.size() == 1) {
      int64_t d = n.deps[0];
      auto it = stageOf.find(d);
      if (it != stageOf.end() && consumers[d] == 1 && !graph_.node(d).cached()) {
        Stage& s = stages[it->second];
        if (!s.import && s.output() == d) {
          s.nodes.push_back(id);
          s.chain.push_back(std::move(spec));
          stageOf.erase(it);
          stageOf[id] = static_cast<size_t>(&s - stages.data());
          continue;
        }
      }
      Stage s;
      s.worker = n.worker;
      s.nodes = {id};
      s.base = OpSpec{"input", Args().set("id", Value::i64(d))};
      s.chain.push_back(std::move(spec));
      stageOf[id] = stages.size();
      stages.push_back(std::move(s));
      continue;
    }
    Stage s;
    s.worker = n.worker;
    s.nodes = {id};
    std::vector<int64_t> inputs;
    for (int64_t d : n.deps) {
      if (!isReadiness(graph_.node(d))) inputs.push_back(d);
    }
    if (!isSource(n.op)) {
      if (!inputs.empty()) spec.args.set("id", Value::i64(inputs[0]));
      if (inputs.size() > 1) spec.args.set("other", Value::i64(inputs[1]));
    }
    s.base = std::move(spec);
    stageOf[id] = stages.size();
    stages.push_back(std::move(s));
  }
  return stages;
}

void Backend::runStage(Stage& s, Attempt& attempt) {
  Worker& w = worker(s.worker);
  ensureComms(w);
  TaskNode& out = graph_.node(s.output());
  int p = w.desc.executorCount;
  std::vector<std::string> scatter;
  if (s.base.name == "parallelize" || s.base.name == "textFile") {
    std::string key = s.base.name == "parallelize" ? "partitions" : "minPartitions";
    int64_t n = s.base.args.i64Or(key, 0);
    if (n <= 0) {
      n = w.props.getInt(props::kPartitionNumber);
      if (n <= 0) n = 2 * static_cast<int64_t>(p);
    }
    s.base.args.set(key, Value::i64(n));
    if (s.base.name == "parallelize") {
      const TaskNode& src = graph_.node(s.nodes.front());
      static const std::vector<Value> kEmpty;
      const std::vector<Value>& data = src.driverData ? *src.driverData : kEmpty;
      auto total = static_cast<int64_t>(data.size());
      std::vector<ValueList> boxes(static_cast<size_t>(p));
      int64_t begin = 0;
      for (int64_t j = 0; j < n; ++j) {
        int64_t size = executor::evenPartitionSize(j, total, n);
        std::vector<Value> slice(data.begin() + begin, data.begin() + begin + size);
        begin += size;
        int owner = executor::blockOwner(j, n, p);
        boxes[static_cast<size_t>(owner)].push_back(
            Value::bytes(storage::partitionBytes(storage::Partition::fromValues(std::move(slice)), 0)));
      }
      scatter.push_back(serializeValue(Value::list({})));
      for (ValueList& b : boxes) scatter.push_back(serializeValue(Value::list(std::move(b))));
    }
  }
  comms::Communicator* dc = scatter.empty() ? nullptr : &driverComm(w);

  StageEvent ev;
  ev.worker = s.worker;
  ev.nodes = s.nodes;
  ev.index = attempt.stageIndex;
  ev.attempt = attempt.number;
  if (hook_) hook_(ev);

  for (int64_t id : s.nodes) markExecuted(graph_.node(id), attempt);
  std::optional<storage::StoreKind> target = persistTarget(out);
  Args a;
  ValueList chain;
  for (const OpSpec& op : s.chain) chain.push_back(op.toValue());
  a.set("out", Value::i64(out.id))
      .set("base", s.base.toValue())
      .set("chain", Value::list(std::move(chain)))
      .set("persist", target ? target->toValue() : Value::null());
  std::vector<Call> calls;
  for (Exec& e : w.execs) calls.push_back(send(w, e.rank, executor::cmd::kStage, a));
  ev.dispatched = true;
  if (hook_) hook_(ev);
  std::optional<Error> driverError;
  if (dc) {
    try {
      dc->scatter(0, std::move(scatter));
    } catch (const Error& e) {
      driverError = e;
    }
  }
  std::vector<Value> replies;
  try {
    replies = finish(calls, driverError);
  } catch (...) {
    for (int64_t id : s.nodes) graph_.node(id).state = TaskState::kFailed;
    throw;
  }
  for (int64_t id : s.nodes) graph_.node(id).state = TaskState::kDone;
  out.materialized = true;
  out.persistedOutput = target.has_value();
  out.partsPerRank.clear();
  out.countPerRank.clear();
  for (const Value& r : replies) {
    Args summary = Args::fromValue(r);
    out.partsPerRank.push_back(summary.i64("parts"));
    out.countPerRank.push_back(summary.i64("count"));
  }
  out.keyParts = static_cast<int>(Args::fromValue(replies.front()).i64("keyParts"));
  out.result = replies.front();
  if (s.base.name != "input") graph_.node(s.nodes.front()).result = replies.front();
  if (!target) attempt.transient.push_back(out.id);
}

void Backend::runImport(Stage& s, Attempt& attempt) {
  TaskNode& n = graph_.node(s.output());
  TaskNode& src = graph_.node(n.deps.at(0));
  Worker& sw = worker(src.worker);
  Worker& dw = worker(n.worker);
  ensureComms(sw);
  ensureComms(dw);
  comms::CommDesc desc = comms::joinWorkers(nextCommId_++, sw.base, dw.base);
  int ps = sw.desc.executorCount;

  StageEvent ev;
  ev.worker = s.worker;
  ev.nodes = s.nodes;
  ev.index = attempt.stageIndex;
  ev.attempt = attempt.number;
  if (hook_) hook_(ev);
  markExecuted(n, attempt);

  std::vector<Call> calls;
  for (Exec& e : sw.execs) {
    Args a;
    a.set("role", Value::str("src"))
        .set("desc", desc.toValue())
        .set("rank", Value::i64(e.rank))
        .set("srcSize", Value::i64(ps))
        .set("id", Value::i64(src.id));
    calls.push_back(send(sw, e.rank, executor::cmd::kImport, a));
  }
  for (Exec& e : dw.execs) {
    Args a;
    a.set("role", Value::str("dst"))
        .set("desc", desc.toValue())
        .set("rank", Value::i64(ps + e.rank))
        .set("srcSize", Value::i64(ps))
        .set("out", Value::i64(n.id));
    calls.push_back(send(dw, e.rank, executor::cmd::kImport, a));
  }
  ev.dispatched = true;
  if (hook_) hook_(ev);
  std::vector<Value> replies;
  try {
    replies = finish(calls, std::nullopt);
  } catch (...) {
    n.state = TaskState::kFailed;
    ep_->release(desc.id);
    throw;
  }
  ep_->release(desc.id);
  n.state = TaskState::kDone;
  n.materialized = true;
  n.persistedOutput = false;
  n.partsPerRank.clear();
  n.countPerRank.clear();
  for (size_t i = static_cast<size_t>(ps); i < replies.size(); ++i) {
    Args summary = Args::fromValue(replies[i]);
    n.partsPerRank.push_back(summary.i64("parts"));
    n.countPerRank.push_back(summary.i64("count"));
  }
  n.keyParts = 0;
  n.result = replies.back();
  if (!n.persist) attempt.transient.push_back(n.id);
}

Value Backend::runActionNode(TaskNode& node, Attempt& attempt) {
  Worker& w = worker(node.worker);
  ensureComms(w);
  std::optional<int64_t> input;
  for (int64_t d : node.deps) {
    if (!isReadiness(graph_.node(d))) input = d;
  }
  if (node.op == "materialize") {
    node.state = TaskState::kDone;
    ++node.execCount;
    return Value::null();
  }
  OpSpec op{execName(node.op), node.params};
  if (node.op == "treeReduce" || node.op == "treeAggregate") op.args.set("tree", Value::boolean(true));
  if (node.op == "voidCall" && input) op.args.set("id", Value::i64(*input));
  bool gathers = isGatherAction(node.op);
  comms::Communicator* dc = gathers ? &driverComm(w) : nullptr;

  StageEvent ev;
  ev.worker = node.worker;
  ev.nodes = {node.id};
  ev.index = attempt.stageIndex;
  ev.attempt = attempt.number;
  if (hook_) hook_(ev);
  markExecuted(node, attempt);

  Args a;
  if (input) a.set("id", Value::i64(*input));
  a.set("op", op.toValue());
  std::vector<Call> calls;
  for (Exec& e : w.execs) calls.push_back(send(w, e.rank, executor::cmd::kAction, a));
  ev.dispatched = true;
  if (hook_) hook_(ev);
  std::optional<Error> driverError;
  std::vector<std::string> parts;
  if (dc) {
    try {
      parts = dc->gather(0, std::string());
    } catch (const Error& e) {
      driverError = e;
    }
  }
  std::vector<Value> replies;
  try {
    replies = finish(calls, driverError);
  } catch (...) {
    node.state = TaskState::kFailed;
    throw;
  }
  node.state = TaskState::kDone;
  const std::string& name = node.op;
  Value result;
  if (gathers) {
    int64_t limit = w.props.getInt(props::kCollectLimit);
    int64_t total = 0;
    std::vector<Value> bodies;
    for (size_t r = 1; r < parts.size(); ++r) {
      Value v = deserializeValue(parts[r]);
      total += v.first().asI64();
      bodies.push_back(v.second());
    }
    if (total > limit) {
      fail(ErrorCode::kResultTooLarge, "result of " + std::to_string(total) + " bytes exceeds " +
                                           props::kCollectLimit + " = " + std::to_string(limit));
    }
    ValueList items;
    for (const Value& b : bodies) {
      for (Value& v : storage::containerValues(b.asBytes())) items.push_back(std::move(v));
    }
    if (name == "take") {
      auto n = static_cast<size_t>(std::max<int64_t>(0, op.args.i64("n")));
      if (items.size() > n) items.resize(n);
    } else if (name == "top") {
      auto n = static_cast<size_t>(std::max<int64_t>(0, op.args.i64("n")));
      std::stable_sort(items.begin(), items.end(),
                       [](const Value& x, const Value& y) { return compareValues(x.first(), y.first()) > 0; });
      if (items.size() > n) items.resize(n);
      for (Value& v : items) v = v.second();
    } else if (name == "takeSample") {
      std::stable_sort(items.begin(), items.end(),
                       [](const Value& x, const Value& y) { return x.first().asI64() < y.first().asI64(); });
      for (Value& v : items) v = v.second();
    }
    result = Value::list(std::move(items));
  } else if (name == "reduce" || name == "treeReduce" || name == "max" || name == "min") {
    const Value& r = replies.front();
    if (r.asList().empty()) fail(ErrorCode::kEmptyDataFrame, name + " of an empty dataframe");
    result = r.asList()[0];
  } else {
    result = replies.front();
  }
  node.result = result;
  return result;
}

void Backend::recover(const std::string& workerId, const std::vector<int>& ranks, Attempt& attempt) {
  Worker& w = worker(workerId);
  auto diskResident = [](const TaskNode& n) {
    return n.materialized && n.persistedOutput && n.persist && n.persist->tier == storage::StoreKind::Tier::kDisk;
  };
  std::set<int64_t> lost;
  for (size_t i = 1; i <= graph_.size(); ++i) {
    TaskNode& n = graph_.node(static_cast<int64_t>(i));
    if (n.worker != workerId || isReadiness(n) || n.kind == TaskKind::kAction) continue;
    bool ran = attempt.executed.count(n.id) != 0;
    if (diskResident(n)) {
      attempt.recomputable.insert(n.id);
    } else if (n.materialized || ran) {
      lost.insert(n.id);
      attempt.recomputable.insert(n.id);
    }
  }
  stats_.lostTasks += static_cast<int64_t>(lost.size());

  w.driver.reset();
  w.baseIssued = false;
  for (int r : ranks) killExec(w.execs[static_cast<size_t>(r)]);
  for (int r : ranks) {
    spawnExecutor(w, r);
    ++stats_.replacements;
  }
  try {
    awaitRegistrations(w, ranks);
  } catch (const Error& e) {
    throw ExecutorLost{workerId, ranks, e};
  }
  configure(w, ranks);
  for (int r : ranks) {
    w.base = comms::replaceMember(nextCommId_++, w.base, r, w.execs[static_cast<size_t>(r)].addr);
  }
  // The chained descriptor replaces the one the survivors hold.
  comms::CommDesc desc = w.base;
  std::vector<Call> calls;
  for (Exec& e : w.execs) {
    Args a;
    a.set("role", Value::str("base")).set("desc", desc.toValue()).set("rank", Value::i64(e.rank));
    calls.push_back(send(w, e.rank, executor::cmd::kCommCreate, a));
  }
  finish(calls, std::nullopt);
  w.baseIssued = true;

  std::vector<int64_t> drop;
  for (size_t i = 1; i <= graph_.size(); ++i) {
    TaskNode& n = graph_.node(static_cast<int64_t>(i));
    if (n.worker != workerId || !n.materialized) continue;
    if (diskResident(n)) {
      std::vector<Call> restores;
      for (int r : ranks) {
        Args a;
        a.set("kind", persistTarget(n)->toValue())
            .set("keyParts", Value::i64(n.keyParts))
            .set("parts", Value::i64(n.partsPerRank.at(static_cast<size_t>(r))))
            .set("id", Value::i64(n.id));
        restores.push_back(send(w, r, executor::cmd::kRestore, a));
      }
      finish(restores, std::nullopt);
    } else {
      n.materialized = false;
      n.persistedOutput = false;
      n.state = TaskState::kPending;
      drop.push_back(n.id);
    }
  }
  freeOutputs(w, drop, false);
}

}  // namespace ignis::scheduler
