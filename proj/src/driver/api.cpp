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

#include "ignis/driver/api.hpp"

#include <cstdlib>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>

#include "ignis/lambda/lambda.hpp"

namespace ignis::driver {

using executor::Args;
using scheduler::TaskKind;

namespace {

std::mutex gMu;
std::unique_ptr<scheduler::Backend> gBackend;
uint64_t gGeneration = 0;

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

scheduler::Backend& backendFor(uint64_t generation) {
  std::lock_guard<std::mutex> lock(gMu);
  if (!gBackend || generation != gGeneration) {
    fail(ErrorCode::kInvalidSession, gBackend ? "handle belongs to a stopped session" : "the session is not started");
  }
  return *gBackend;
}

bool isLambdaText(const std::string& s) {
  return s.rfind("lambda", 0) == 0 && s.size() > 6 && (s[6] == ' ' || s[6] == '\t' || s[6] == ':');
}

}  // namespace

// IProperties.

IProperties& IProperties::set(const std::string& key, const std::string& value) {
  props_.set(key, value);
  return *this;
}

IProperties IProperties::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot read properties file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return IProperties(Properties::parse(ss.str()));
}

// ISource.

ISource::ISource(const std::string& nameOrLambda) : text_(trim(nameOrLambda)) {
  if (text_.empty()) fail(ErrorCode::kUnknownFunction, "empty function name");
  if (isLambdaText(text_)) {
    size_t colon = text_.find(':');
    if (colon == std::string::npos) fail(ErrorCode::kParse, "lambda text needs ':' before its body: " + text_);
    std::vector<std::string> params;
    std::string head = trim(text_.substr(6, colon - 6));
    if (!head.empty()) {
      std::stringstream ss(head);
      std::string p;
      while (std::getline(ss, p, ',')) params.push_back(trim(p));
    }
    lambda::Lambda l = lambda::Lambda::parse(std::move(params), text_.substr(colon + 1));
    target_ = l.toValue();
    lambda_ = true;
  } else {
    target_ = Value::str(text_);
  }
}

ISource& ISource::addParam(const std::string& name, Value value) {
  for (auto& [k, v] : params_) {
    if (k == name) {
      v = std::move(value);
      return *this;
    }
  }
  params_.emplace_back(name, std::move(value));
  return *this;
}

Value ISource::toValue() const {
  ValueList params;
  for (const auto& [k, v] : params_) params.push_back(Value::pair(Value::str(k), v));
  return Value::pair(target_, Value::list(std::move(params)));
}

ISource ISource::fromValue(const Value& v) {
  ISource s;
  s.target_ = v.first();
  if (s.target_.isStr()) {
    s.text_ = s.target_.asStr();
  } else {
    lambda::Lambda l = lambda::Lambda::fromValue(s.target_);
    std::string head;
    for (const std::string& p : l.params()) head += (head.empty() ? "" : ", ") + p;
    s.text_ = "lambda " + head + ": " + l.body();
    s.lambda_ = true;
  }
  for (const Value& kv : v.second().asList()) s.params_.emplace_back(kv.first().asStr(), kv.second());
  return s;
}

// Ignis.

void Ignis::start(const IProperties& props) {
  std::lock_guard<std::mutex> lock(gMu);
  if (gBackend) fail(ErrorCode::kDoubleStart, "Ignis is already started");
  Properties merged;
  if (const char* file = std::getenv("IGNIS_SUBMIT_PROPERTIES"); file && *file) merged = IProperties::load(file).raw();
  for (const auto& [k, v] : props.raw().entries()) {
    if (k.rfind(props::kDriverPrefix, 0) == 0 && merged.isSet(k)) continue;
    merged.set(k, v);
  }
  gBackend = std::make_unique<scheduler::Backend>(merged);
  ++gGeneration;
}

void Ignis::stop() {
  std::unique_ptr<scheduler::Backend> b;
  {
    std::lock_guard<std::mutex> lock(gMu);
    b = std::move(gBackend);
  }
  if (b) b->stop();
}

bool Ignis::started() {
  std::lock_guard<std::mutex> lock(gMu);
  return gBackend != nullptr;
}

scheduler::Backend& Ignis::backend() {
  std::lock_guard<std::mutex> lock(gMu);
  if (!gBackend) fail(ErrorCode::kInvalidSession, "the session is not started");
  return *gBackend;
}

uint64_t Ignis::generation() {
  std::lock_guard<std::mutex> lock(gMu);
  return gGeneration;
}

// ICluster.

ICluster::ICluster() : ICluster(IProperties()) {}

ICluster::ICluster(const IProperties& props) {
  generation_ = Ignis::generation();
  id_ = backendFor(generation_).createCluster(props.raw());
}

// IWorker.

IWorker::IWorker(const ICluster& cluster, const std::string& registryNamespace) {
  generation_ = cluster.generation_;
  id_ = backendFor(generation_).createWorker(cluster.id_, registryNamespace);
}

scheduler::Backend& IWorker::backend() const { return backendFor(generation_); }

IDataFrame IWorker::parallelize(std::vector<Value> values, int64_t partitions) const {
  auto& b = backend();
  auto data = std::make_shared<const std::vector<Value>>(std::move(values));
  Args a;
  a.set("partitions", Value::i64(partitions));
  int64_t id = b.record(TaskKind::kTransform, "parallelize", a, {b.readinessNode(id_)}, id_, data);
  return IDataFrame(id, id_, generation_);
}

IDataFrame IWorker::textFile(const std::string& path, int64_t minPartitions) const {
  auto& b = backend();
  Args a;
  a.set("path", Value::str(path)).set("minPartitions", Value::i64(minPartitions));
  int64_t id = b.record(TaskKind::kTransform, "textFile", a, {b.readinessNode(id_)}, id_);
  return IDataFrame(id, id_, generation_);
}

IDataFrame IWorker::partitionJsonFile(const std::string& path) const {
  auto& b = backend();
  int64_t id = b.record(TaskKind::kTransform, "partitionJsonFile", Args().set("path", Value::str(path)),
                        {b.readinessNode(id_)}, id_);
  return IDataFrame(id, id_, generation_);
}

IDataFrame IWorker::partitionObjectFile(const std::string& path) const {
  auto& b = backend();
  int64_t id = b.record(TaskKind::kTransform, "partitionObjectFile", Args().set("path", Value::str(path)),
                        {b.readinessNode(id_)}, id_);
  return IDataFrame(id, id_, generation_);
}

void IWorker::loadLibrary(const std::string& library) const { backend().loadLibrary(id_, library); }

IDataFrame IWorker::call(const ISource& fn) const {
  auto& b = backend();
  int64_t id = b.record(TaskKind::kTransform, "call", Args().set("fn", fn.toValue()), {b.readinessNode(id_)}, id_);
  return IDataFrame(id, id_, generation_);
}

IDataFrame IWorker::call(const ISource& fn, const IDataFrame& input) const {
  auto& b = backend();
  if (input.generation_ != generation_) fail(ErrorCode::kInvalidSession, "dataframe belongs to another session");
  int64_t id = b.record(TaskKind::kTransform, "call", Args().set("fn", fn.toValue()), {input.id_}, id_);
  return IDataFrame(id, id_, generation_);
}

void IWorker::voidCall(const ISource& fn) const {
  auto& b = backend();
  int64_t id = b.record(TaskKind::kAction, "voidCall", Args().set("fn", fn.toValue()), {b.readinessNode(id_)}, id_);
  b.run(id);
}

void IWorker::voidCall(const ISource& fn, const IDataFrame& input) const {
  auto& b = backend();
  if (input.generation_ != generation_) fail(ErrorCode::kInvalidSession, "dataframe belongs to another session");
  int64_t id = b.record(TaskKind::kAction, "voidCall", Args().set("fn", fn.toValue()), {input.id_}, id_);
  b.run(id);
}

IDataFrame IWorker::importData(const IDataFrame& source) const {
  auto& b = backend();
  if (source.generation_ != generation_) fail(ErrorCode::kInvalidSession, "dataframe belongs to another session");
  int64_t id = b.record(TaskKind::kImport, "import", Args(), {source.id_}, id_);
  return IDataFrame(id, id_, generation_);
}

std::vector<scheduler::ExecutorInfo> IWorker::executors() const { return backend().executors(id_); }

void IWorker::stop() const { backend().destroyWorker(id_); }

// IDataFrame.

scheduler::Backend& IDataFrame::backend() const { return backendFor(generation_); }

IDataFrame IDataFrame::transform(const std::string& op, Args params, std::vector<int64_t> extraDeps) const {
  auto& b = backend();
  std::vector<int64_t> deps{id_};
  deps.insert(deps.end(), extraDeps.begin(), extraDeps.end());
  int64_t id = b.record(TaskKind::kTransform, op, std::move(params), std::move(deps), worker_);
  return IDataFrame(id, worker_, generation_);
}

Value IDataFrame::action(const std::string& op, Args params) const {
  auto& b = backend();
  int64_t id = b.record(TaskKind::kAction, op, std::move(params), {id_}, worker_);
  return b.run(id);
}

IDataFrame IDataFrame::map(const ISource& fn) const { return transform("map", Args().set("fn", fn.toValue())); }
IDataFrame IDataFrame::filter(const ISource& fn) const { return transform("filter", Args().set("fn", fn.toValue())); }
IDataFrame IDataFrame::flatmap(const ISource& fn) const {
  return transform("flatmap", Args().set("fn", fn.toValue()));
}
IDataFrame IDataFrame::keyBy(const ISource& fn) const { return transform("keyBy", Args().set("fn", fn.toValue())); }
IDataFrame IDataFrame::mapPartitions(const ISource& fn) const {
  return transform("mapPartitions", Args().set("fn", fn.toValue()));
}
IDataFrame IDataFrame::keys() const { return transform("keys", Args()); }
IDataFrame IDataFrame::values() const { return transform("values", Args()); }
IDataFrame IDataFrame::mapValues(const ISource& fn) const {
  return transform("mapValues", Args().set("fn", fn.toValue()));
}

IDataFrame IDataFrame::groupBy(const ISource& fn, int64_t partitions) const {
  return transform("groupBy", Args().set("fn", fn.toValue()).set("partitions", Value::i64(partitions)));
}
IDataFrame IDataFrame::groupByKey(int64_t partitions) const {
  return transform("groupByKey", Args().set("partitions", Value::i64(partitions)));
}
IDataFrame IDataFrame::sort(bool ascending) const {
  return transform("sort", Args().set("ascending", Value::boolean(ascending)));
}
IDataFrame IDataFrame::sortBy(const ISource& fn, bool ascending) const {
  return transform("sortBy", Args().set("fn", fn.toValue()).set("ascending", Value::boolean(ascending)));
}
IDataFrame IDataFrame::sortByKey(bool ascending) const {
  return transform("sortByKey",
                   Args().set("fn", ISource("lambda p: fst p").toValue()).set("ascending", Value::boolean(ascending)));
}

Value IDataFrame::reduce(const ISource& fn) const { return action("reduce", Args().set("fn", fn.toValue())); }
Value IDataFrame::treeReduce(const ISource& fn) const { return action("treeReduce", Args().set("fn", fn.toValue())); }
Value IDataFrame::aggregate(const Value& zero, const ISource& seqOp, const ISource& combOp) const {
  return action("aggregate", Args().set("zero", zero).set("seqOp", seqOp.toValue()).set("combOp", combOp.toValue()));
}
Value IDataFrame::treeAggregate(const Value& zero, const ISource& seqOp, const ISource& combOp) const {
  return action("treeAggregate",
                Args().set("zero", zero).set("seqOp", seqOp.toValue()).set("combOp", combOp.toValue()));
}
Value IDataFrame::fold(const Value& zero, const ISource& fn) const {
  return action("fold", Args().set("zero", zero).set("fn", fn.toValue()));
}
IDataFrame IDataFrame::reduceByKey(const ISource& fn, int64_t partitions) const {
  return transform("reduceByKey", Args().set("fn", fn.toValue()).set("partitions", Value::i64(partitions)));
}
IDataFrame IDataFrame::aggregateByKey(const Value& zero, const ISource& seqOp, const ISource& combOp,
                                      int64_t partitions) const {
  return transform("aggregateByKey", Args()
                                         .set("zero", zero)
                                         .set("seqOp", seqOp.toValue())
                                         .set("combOp", combOp.toValue())
                                         .set("partitions", Value::i64(partitions)));
}

std::vector<Value> IDataFrame::collect() const { return action("collect", Args()).asList(); }
std::vector<Value> IDataFrame::top(int64_t n) const { return action("top", Args().set("n", Value::i64(n))).asList(); }
std::vector<Value> IDataFrame::top(int64_t n, const ISource& key) const {
  return action("top", Args().set("n", Value::i64(n)).set("fn", key.toValue())).asList();
}
std::vector<Value> IDataFrame::take(int64_t n) const {
  return action("take", Args().set("n", Value::i64(n))).asList();
}
std::string IDataFrame::saveAsObjectFile(const std::string& path) const {
  return action("saveAsObjectFile", Args().set("path", Value::str(path))).asStr();
}
std::string IDataFrame::saveAsTextFile(const std::string& path) const {
  return action("saveAsTextFile", Args().set("path", Value::str(path))).asStr();
}
std::string IDataFrame::saveAsJsonFile(const std::string& path) const {
  return action("saveAsJsonFile", Args().set("path", Value::str(path))).asStr();
}

IDataFrame IDataFrame::unionDataFrame(const IDataFrame& other) const {
  return transform("union", Args(), {other.id_});
}
IDataFrame IDataFrame::join(const IDataFrame& other, int64_t partitions) const {
  return transform("join", Args().set("partitions", Value::i64(partitions)), {other.id_});
}
IDataFrame IDataFrame::distinct(int64_t partitions) const {
  return transform("distinct", Args().set("partitions", Value::i64(partitions)));
}

IDataFrame IDataFrame::sample(bool withReplacement, double fraction, int64_t seed) const {
  return transform("sample", Args()
                                 .set("withReplacement", Value::boolean(withReplacement))
                                 .set("fraction", Value::f64(fraction))
                                 .set("seed", Value::i64(seed)));
}
IDataFrame IDataFrame::sampleByKey(bool withReplacement, const Value& fractions, int64_t seed) const {
  return transform("sampleByKey", Args()
                                      .set("withReplacement", Value::boolean(withReplacement))
                                      .set("fractions", fractions)
                                      .set("seed", Value::i64(seed)));
}
std::vector<Value> IDataFrame::takeSample(bool withReplacement, int64_t n, int64_t seed) const {
  return action("takeSample", Args()
                                  .set("withReplacement", Value::boolean(withReplacement))
                                  .set("n", Value::i64(n))
                                  .set("seed", Value::i64(seed)))
      .asList();
}
int64_t IDataFrame::count() const { return action("count", Args()).asI64(); }
Value IDataFrame::max() const { return action("max", Args()); }
Value IDataFrame::max(const ISource& key) const { return action("max", Args().set("fn", key.toValue())); }
Value IDataFrame::min() const { return action("min", Args()); }
Value IDataFrame::min(const ISource& key) const { return action("min", Args().set("fn", key.toValue())); }
IDataFrame IDataFrame::countByKey() const { return transform("countByKey", Args()); }
IDataFrame IDataFrame::countByValue() const { return transform("countByValue", Args()); }

IDataFrame IDataFrame::repartition(int64_t partitions) const {
  if (partitions < 1) fail(ErrorCode::kPrecondition, "repartition needs at least one partition");
  return transform("repartition", Args().set("partitions", Value::i64(partitions)));
}
IDataFrame IDataFrame::partitionBy(int64_t partitions) const {
  if (partitions < 1) fail(ErrorCode::kPrecondition, "partitionBy needs at least one partition");
  return transform("partitionBy", Args().set("partitions", Value::i64(partitions)));
}
IDataFrame IDataFrame::partitionBy(int64_t partitions, const ISource& fn) const {
  if (partitions < 1) fail(ErrorCode::kPrecondition, "partitionBy needs at least one partition");
  return transform("partitionBy", Args().set("partitions", Value::i64(partitions)).set("fn", fn.toValue()));
}

IDataFrame& IDataFrame::persist(const storage::StoreKind& tier) {
  backend().persist(id_, tier);
  return *this;
}
IDataFrame& IDataFrame::cache() { return persist(storage::StoreKind::inMemory()); }
IDataFrame& IDataFrame::unpersist() {
  backend().persist(id_, std::nullopt);
  return *this;
}
IDataFrame& IDataFrame::uncache() { return unpersist(); }

IDataFrame IDataFrame::iterate(const ISource& fn, const Value& state, int64_t maxIterations) const {
  if (fn.isLambda()) fail(ErrorCode::kType, "iterate needs a registered iteration function");
  return transform("iterate",
                   Args().set("fn", fn.toValue()).set("state", state).set("maxIter", Value::i64(maxIterations)));
}

IterationResult IDataFrame::iterationResult() const {
  auto& b = backend();
  Value r = b.nodeResult(id_);
  if (r.isNull()) {
    action("materialize", Args());
    r = b.nodeResult(id_);
  }
  Args a = Args::fromValue(r);
  if (!a.has("iterations")) fail(ErrorCode::kPrecondition, "dataframe " + std::to_string(id_) + " is not an iteration");
  IterationResult out;
  out.state = a.get("state");
  out.iterations = a.i64("iterations");
  out.converged = a.flag("converged");
  for (const Value& round : a.get("pids").asList()) {
    std::vector<int64_t> pids;
    for (const Value& p : round.asList()) pids.push_back(p.asI64());
    out.pids.push_back(std::move(pids));
  }
  return out;
}

}  // namespace ignis::driver
