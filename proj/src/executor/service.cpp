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


#include "ignis/executor/service.hpp"

#include <unistd.h>

#include <filesystem>

namespace ignis::executor {

namespace fs = std::filesystem;

namespace {

comms::Endpoint::Options endpointOptions(const ExecutorService::Options& o) {
  comms::Endpoint::Options e;
  e.host = o.host;
  e.port = o.port;
  e.connectTimeoutMs = o.connectTimeoutMs;
  return e;
}

std::string rankDir(const std::string& base, int rank) { return (fs::path(base) / ("r" + std::to_string(rank))).string(); }

Value stageSummary(const Dataset& ds) {
  Args a;
  a.set("parts", Value::i64(static_cast<int64_t>(ds.parts.size())));
  a.set("count", Value::i64(static_cast<int64_t>(ds.size())));
  a.set("keyParts", Value::i64(ds.keyParts));
  return a.toValue();
}

}  // namespace

ExecutorService::ExecutorService(Options options) : options_(std::move(options)), ep_(endpointOptions(options_)) {
  registerStdBundle(registry_);
}

ExecutorService::~ExecutorService() {
  outputs_.clear();
  driver_.reset();
  base_.reset();
  ep_.close();
}

int ExecutorService::run() {
  Registration reg{options_.workerId, options_.rank, static_cast<int64_t>(::getpid()), ep_.host(), ep_.port()};
  comms::Frame hello;
  hello.opcode = comms::Opcode::kRegister;
  hello.payload = serializeValue(reg.toValue());
  ep_.send(options_.driverKey, hello);
  while (true) {
    comms::Frame f;
    try {
      f = ep_.recv(0, options_.driverKey, comms::Lane::kControl);
    } catch (const Error&) {
      return 1;
    }
    Value reply;
    std::string name;
    try {
      Value msg = deserializeValue(f.payload);
      name = msg.first().asStr();
      reply = okReply(handle(name, Args::fromValue(msg.second())));
    } catch (const Error& e) {
      Error err(e.code(), e.what(), e.rank() >= 0 ? e.rank() : options_.rank);
      abortComms(err);
      reply = errorReply(err);
    } catch (const std::exception& e) {
      Error err(ErrorCode::kInternal, e.what(), options_.rank);
      abortComms(err);
      reply = errorReply(err);
    }
    comms::Frame out;
    out.opcode = comms::Opcode::kReply;
    out.seq = f.seq;
    out.payload = serializeValue(reply);
    try {
      ep_.send(options_.driverKey, out);
    } catch (const Error&) {
      return 1;
    }
    if (name == cmd::kShutdown) return 0;
  }
}

void ExecutorService::abortComms(const Error& e) {
  for (auto* c : {base_.get(), driver_.get()}) {
    if (!c) continue;
    try {
      c->abort(e);
    } catch (const std::exception&) {
    }
  }
}

Value ExecutorService::handle(const std::string& name, const Args& args) {
  if (name == cmd::kConfigure) return configure(args);
  if (name == cmd::kCommCreate) return commCreate(args);
  if (name == cmd::kCommDrop) {
    (args.str("role") == "driver" ? driver_ : base_).reset();
    return Value::null();
  }
  if (name == cmd::kLibraryLoad) {
    registry_.load(args.str("name"));
    return Value::null();
  }
  if (name == cmd::kStage) return stage(args);
  if (name == cmd::kAction) return action(args);
  if (name == cmd::kImport) return importData(args);
  if (name == cmd::kFree) return freeDatasets(args);
  if (name == cmd::kRestore) return restore(args);
  if (name == cmd::kMetrics) return metrics();
  if (name == cmd::kPing || name == cmd::kShutdown) return Value::i64(::getpid());
  fail(ErrorCode::kProtocol, "unknown command '" + name + "'");
}

Value ExecutorService::configure(const Args& args) {
  props_ = Properties::fromValue(args.get("props"));
  jobId_ = args.str("job");
  registryNamespace_ = args.str("namespace");
  count_ = static_cast<int>(args.i64("count"));
  if (registryNamespace_ != "std" && Registry::isBuiltinBundle(registryNamespace_)) registry_.load(registryNamespace_);
  storage::StoreKind kind = storage::StoreKind::fromProperties(props_);
  if (kind.tier == storage::StoreKind::Tier::kDisk) {
    std::error_code ec;
    fs::create_directories(kind.dir, ec);
    if (ec) fail(ErrorCode::kIo, "cannot create partition directory '" + kind.dir + "'");
  }
  return Value::i64(::getpid());
}

Value ExecutorService::commCreate(const Args& args) {
  comms::CommDesc desc = comms::CommDesc::fromValue(args.get("desc"));
  auto comm = std::make_unique<comms::Communicator>(ep_, desc, static_cast<int>(args.i64("rank")));
  comm->open();
  (args.str("role") == "driver" ? driver_ : base_) = std::move(comm);
  return Value::null();
}

TaskEnv ExecutorService::makeEnv() const {
  TaskEnv env;
  env.ctx.workerId = options_.workerId;
  env.ctx.executorRank = options_.rank;
  env.ctx.executorCount = count_;
  env.ctx.props = &props_;
  env.ctx.comm = base_.get();
  env.registry = &registry_;
  env.store = storage::StoreKind::fromProperties(props_);
  env.threads = static_cast<int>(std::max<int64_t>(1, props_.getInt(props::kExecutorCores)));
  env.metrics = &metrics_;
  return env;
}

const Dataset& ExecutorService::dataset(int64_t id) const {
  auto it = outputs_.find(id);
  if (it == outputs_.end()) {
    fail(ErrorCode::kPrecondition,
         "dataset " + std::to_string(id) + " is not resident on executor " + std::to_string(options_.rank));
  }
  return it->second;
}

Value ExecutorService::stage(const Args& args) {
  if (!base_) fail(ErrorCode::kPrecondition, "executor has no base communicator");
  int64_t out = args.i64("out");
  OpSpec base = OpSpec::fromValue(args.get("base"));
  std::vector<OpSpec> chain;
  for (const Value& v : args.get("chain").asList()) chain.push_back(OpSpec::fromValue(v));

  TaskEnv baseEnv = makeEnv();
  TaskEnv outEnv = baseEnv;
  const Value& persist = args.getOr("persist", Value());
  if (!persist.isNull()) {
    outEnv.store = storage::StoreKind::fromValue(persist);
    if (outEnv.store.tier == storage::StoreKind::Tier::kDisk) {
      outEnv.store.dir = rankDir(outEnv.store.dir, options_.rank);
      outEnv.persistFiles = true;
      std::error_code ec;
      fs::remove_all(outEnv.store.dir, ec);
      fs::create_directories(outEnv.store.dir, ec);
      if (ec) fail(ErrorCode::kIo, "cannot create persist directory '" + outEnv.store.dir + "'");
    }
    if (chain.empty()) baseEnv = outEnv;
  }
  outputs_.erase(out);
  Args extra;
  Dataset ds = runBase(baseEnv, base, extra);
  ds = runChain(outEnv, ds, chain);
  if (!persist.isNull()) {
    for (size_t j = 0; j < ds.parts.size(); ++j) {
      if (!(ds.parts[j]->kind() == outEnv.store)) {
        PartRef copy = outEnv.newPartition(j);
        ds.parts[j]->forEach([&](const Value& v) { copy->append(v); });
        ds.parts[j] = std::move(copy);
      }
      if (outEnv.persistFiles) ds.parts[j]->keepFile(true);
    }
  }
  metrics_.stages.fetch_add(1);
  Value summary = stageSummary(ds);
  outputs_[out] = std::move(ds);
  if (extra.entries().empty()) return summary;
  Args withExtra = Args::fromValue(summary);
  for (const auto& [k, v] : extra.entries()) withExtra.set(k, v);
  return withExtra.toValue();
}

Dataset ExecutorService::runBase(const TaskEnv& env, const OpSpec& base, Args& extra) {
  const std::string& op = base.name;
  const Args& a = base.args;
  if (op == "input") return dataset(a.i64("id"));
  if (op == "parallelize") {
    if (!driver_) fail(ErrorCode::kPrecondition, "parallelize needs the driver communicator");
    Value parts = deserializeValue(driver_->scatter(0, {}));
    Dataset ds;
    for (const Value& bytes : parts.asList()) {
      PartRef part = env.newPartition(ds.parts.size());
      for (Value& v : storage::containerValues(bytes.asBytes())) part->append(std::move(v));
      ds.parts.push_back(std::move(part));
    }
    return ds;
  }
  if (op == "textFile") return readTextFile(env, a.str("path"), a.i64("minPartitions"));
  if (op == "partitionJsonFile") return readJsonFiles(env, a.str("path"));
  if (op == "partitionObjectFile") return readObjectFiles(env, a.str("path"));
  if (op == "groupByKey" || op == "groupBy") return keyedAggregate(env, dataset(a.i64("id")), KeyedKind::kGroup, a);
  if (op == "reduceByKey") return keyedAggregate(env, dataset(a.i64("id")), KeyedKind::kReduce, a);
  if (op == "aggregateByKey") return keyedAggregate(env, dataset(a.i64("id")), KeyedKind::kAggregate, a);
  if (op == "countByKey") return keyedAggregate(env, dataset(a.i64("id")), KeyedKind::kCountByKey, a);
  if (op == "countByValue") return keyedAggregate(env, dataset(a.i64("id")), KeyedKind::kCountByValue, a);
  if (op == "distinct") return keyedAggregate(env, dataset(a.i64("id")), KeyedKind::kDistinct, a);
  if (op == "join") return joinDatasets(env, dataset(a.i64("id")), dataset(a.i64("other")), a);
  if (op == "union") return unionDatasets(dataset(a.i64("id")), dataset(a.i64("other")));
  if (op == "sortBy") return sortDataset(env, dataset(a.i64("id")), a);
  if (op == "repartition") return repartitionDataset(env, dataset(a.i64("id")), a.i64("partitions"));
  if (op == "partitionBy") return partitionByDataset(env, dataset(a.i64("id")), a);
  if (op == "call") return callFunction(env, a, true);
  if (op == "iterate") return iterate(env, dataset(a.i64("id")), a, extra);
  fail(ErrorCode::kProtocol, "unknown stage operator '" + op + "'");
}

Dataset ExecutorService::callFunction(const TaskEnv& env, const Args& args, bool returnsValue) {
  const Value& ref = args.get("fn");
  if (!ref.isPair() || !ref.first().isStr()) {
    fail(ErrorCode::kType, "call needs a registered function name, not a lambda");
  }
  const std::string& name = ref.first().asStr();
  const FnEntry& entry = registry_.get(name);
  bool hasInput = args.has("id");
  if (entry.kind != FnEntry::Kind::kCall || entry.arity != (hasInput ? 1 : 0)) {
    fail(ErrorCode::kArityMismatch,
         "function '" + name + "' cannot be called " + (hasInput ? "with" : "without") + " an input dataframe");
  }
  if (entry.returnsValue != returnsValue) {
    fail(ErrorCode::kArityMismatch, "function '" + name + "' is " + (entry.returnsValue ? "not " : "") +
                                        "declared void; use " + (entry.returnsValue ? "call" : "voidCall"));
  }
  Context ctx = env.ctx;
  ctx.vars = UserFn::paramsOf(ref);
  std::vector<Value> input;
  if (hasInput) input = dataset(args.i64("id")).values();
  std::vector<Value> out;
  try {
    out = entry.call(ctx, hasInput ? &input : nullptr);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kPeerLost || e.code() == ErrorCode::kStaleEpoch) throw;
    throw Error(e.code(), std::string(e.what()) + " in " + name + " at executor " + std::to_string(env.rank()),
                env.rank());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kUserFunction, std::string(e.what()) + " in " + name, env.rank());
  }
  Dataset ds;
  PartRef part = env.newPartition(0);
  if (returnsValue) {
    for (Value& v : out) part->append(std::move(v));
  }
  ds.parts.push_back(std::move(part));
  return ds;
}

Dataset ExecutorService::iterate(const TaskEnv& env, const Dataset& input, const Args& args, Args& extra) {
  const Value& ref = args.get("fn");
  if (!ref.isPair() || !ref.first().isStr()) fail(ErrorCode::kType, "iterate needs a registered iteration function");
  const std::string& name = ref.first().asStr();
  const FnEntry& entry = registry_.get(name);
  if (entry.kind != FnEntry::Kind::kIteration) {
    fail(ErrorCode::kArityMismatch, "function '" + name + "' is not an iteration function");
  }
  int64_t maxIter = args.i64("maxIter");
  bool capped = maxIter < 0;
  if (capped) maxIter = props_.getInt(props::kIterateMax);
  Context ctx = env.ctx;
  ctx.vars = UserFn::paramsOf(ref);
  std::vector<Value> data = input.values();
  Value state = args.get("state");
  bool converged = false;
  int64_t iterations = 0;
  ValueList pids;
  for (; iterations < maxIter && !converged;) {
    IterationStep step;
    try {
      step = entry.iteration(ctx, data, state);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kPeerLost || e.code() == ErrorCode::kStaleEpoch) throw;
      throw Error(e.code(), std::string(e.what()) + " in " + name + " iteration " + std::to_string(iterations),
                  env.rank());
    }
    state = std::move(step.state);
    converged = step.converged;
    ++iterations;
    std::vector<std::string> all = env.comm().gather(0, serializeValue(Value::i64(::getpid())));
    ValueList round;
    for (const std::string& s : all) round.push_back(deserializeValue(s));
    pids.push_back(Value::list(std::move(round)));
  }
  if (capped && !converged) {
    fail(ErrorCode::kNonConvergence,
         "iteration '" + name + "' did not converge within " + std::to_string(maxIter) + " iterations");
  }
  if (env.rank() == 0) {
    extra.set("state", state);
    extra.set("iterations", Value::i64(iterations));
    extra.set("converged", Value::boolean(converged));
    extra.set("pids", Value::list(std::move(pids)));
  }
  Dataset out = input;
  return out;
}

Value ExecutorService::toDriver(std::vector<Value> values) {
  if (!driver_) fail(ErrorCode::kPrecondition, "executor has no driver communicator");
  int64_t limit = props_.getInt(props::kCollectLimit);
  std::string body = storage::partitionBytes(storage::Partition::fromValues(std::move(values)), 0);
  auto size = static_cast<int64_t>(body.size());
  if (size > limit) body.clear();
  driver_->gather(0, serializeValue(Value::pair(Value::i64(size), Value::bytes(std::move(body)))));
  return Value::null();
}

Value ExecutorService::action(const Args& args) {
  if (!base_) fail(ErrorCode::kPrecondition, "executor has no base communicator");
  OpSpec op = OpSpec::fromValue(args.get("op"));
  TaskEnv env = makeEnv();
  const Args& a = op.args;
  if (op.name == "voidCall") {
    callFunction(env, a, false);
    return Value::null();
  }
  const Dataset& in = dataset(args.i64("id"));
  if (op.name == "count") return Value::i64(countAction(env, in));
  if (op.name == "reduce") return reduceAction(env, in, a);
  if (op.name == "aggregate") return aggregateAction(env, in, a, false);
  if (op.name == "fold") return aggregateAction(env, in, a, true);
  if (op.name == "max" || op.name == "min") return extremeAction(env, in, a, op.name == "max");
  if (op.name == "collect") return toDriver(in.values());
  if (op.name == "take") return toDriver(takeLocal(in, a.i64("n")));
  if (op.name == "top") return toDriver(topLocal(env, in, a));
  if (op.name == "takeSample") return toDriver(takeSampleLocal(env, in, a));
  if (op.name == "saveAsTextFile") {
    writeTextFiles(env, in, a.str("path"));
  } else if (op.name == "saveAsJsonFile") {
    writeJsonFiles(env, in, a.str("path"));
  } else if (op.name == "saveAsObjectFile") {
    writeObjectFiles(env, in, a.str("path"), static_cast<int>(props_.getInt(props::kPartitionCompression)));
  } else {
    fail(ErrorCode::kProtocol, "unknown action '" + op.name + "'");
  }
  if (env.size() > 1) env.comm().barrier();
  return Value::str(a.str("path"));
}

Value ExecutorService::importData(const Args& args) {
  comms::CommDesc desc = comms::CommDesc::fromValue(args.get("desc"));
  int rank = static_cast<int>(args.i64("rank"));
  int srcSize = static_cast<int>(args.i64("srcSize"));
  int dstSize = desc.size() - srcSize;
  bool isSource = args.str("role") == "src";
  comms::Communicator comm(ep_, desc, rank);
  comm.open();
  const Dataset* src = isSource ? &dataset(args.i64("id")) : nullptr;
  GlobalOffset g = globalOffset(&comm, src ? static_cast<int64_t>(src->parts.size()) : 0);
  std::vector<ValueList> boxes(desc.size());
  if (src) {
    for (size_t j = 0; j < src->parts.size(); ++j) {
      int64_t gi = g.offset + static_cast<int64_t>(j);
      int dst = srcSize + blockOwner(gi, g.total, dstSize);
      boxes[dst].push_back(Value::bytes(storage::partitionBytes(*src->parts[j], 0)));
    }
  }
  std::vector<std::string> wire(desc.size());
  uint64_t bytes = 0;
  for (int r = 0; r < desc.size(); ++r) {
    wire[r] = serializeValue(Value::list(std::move(boxes[r])));
    if (r != rank) bytes += wire[r].size();
  }
  std::vector<std::string> in = comm.alltoall(std::move(wire));
  metrics_.exchangeMessages.fetch_add(static_cast<uint64_t>(desc.size() - 1));
  metrics_.exchangeBytes.fetch_add(bytes);
  comm.barrier();
  if (isSource) return Value::null();
  TaskEnv env = makeEnv();
  Dataset ds;
  for (const std::string& w : in) {
    Value boxes = deserializeValue(w);
    for (const Value& bytes : boxes.asList()) {
      PartRef part = env.newPartition(ds.parts.size());
      for (Value& v : storage::containerValues(bytes.asBytes())) part->append(std::move(v));
      ds.parts.push_back(std::move(part));
    }
  }
  Value summary = stageSummary(ds);
  outputs_[args.i64("out")] = std::move(ds);
  return summary;
}

Value ExecutorService::freeDatasets(const Args& args) {
  bool dropFiles = args.flag("dropFiles");
  for (const Value& id : args.get("ids").asList()) {
    auto it = outputs_.find(id.asI64());
    if (it == outputs_.end()) continue;
    if (dropFiles) {
      for (PartRef& p : it->second.parts) {
        if (p.use_count() == 1 && p->kind().tier == storage::StoreKind::Tier::kDisk) p->keepFile(false);
      }
    }
    outputs_.erase(it);
  }
  if (args.has("dir")) {
    std::error_code ec;
    fs::remove_all(rankDir(args.str("dir"), options_.rank), ec);
  }
  return Value::null();
}

Value ExecutorService::restore(const Args& args) {
  storage::StoreKind kind = storage::StoreKind::fromValue(args.get("kind"));
  std::string dir = rankDir(kind.dir, options_.rank);
  Dataset ds;
  ds.keyParts = static_cast<int>(args.i64Or("keyParts", 0));
  std::error_code ec;
  if (fs::is_directory(dir, ec)) {
    for (const std::string& file : listInputFiles(dir)) {
      ds.parts.push_back(std::make_shared<storage::Partition>(storage::Partition::openFile(file)));
    }
  }
  if (static_cast<int64_t>(ds.parts.size()) != args.i64Or("parts", static_cast<int64_t>(ds.parts.size()))) {
    fail(ErrorCode::kIo, "persisted dataset " + std::to_string(args.i64("id")) + " is incomplete in " + dir);
  }
  Value summary = stageSummary(ds);
  outputs_[args.i64("id")] = std::move(ds);
  return summary;
}

Value ExecutorService::metrics() const {
  Args a;
  a.set("partitionPasses", Value::i64(static_cast<int64_t>(metrics_.partitionPasses.load())));
  a.set("stages", Value::i64(static_cast<int64_t>(metrics_.stages.load())));
  a.set("exchangeMessages", Value::i64(static_cast<int64_t>(metrics_.exchangeMessages.load())));
  a.set("exchangeBytes", Value::i64(static_cast<int64_t>(metrics_.exchangeBytes.load())));
  a.set("dataFrames", Value::i64(static_cast<int64_t>(ep_.dataFramesSent())));
  a.set("dataBytes", Value::i64(static_cast<int64_t>(ep_.dataBytesSent())));
  a.set("pid", Value::i64(::getpid()));
  return a.toValue();
}

}  // namespace ignis::executor
