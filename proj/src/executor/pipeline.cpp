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


#include <optional>
#include <unordered_map>

#include "ignis/executor/ops.hpp"

namespace ignis::executor {

namespace {

class Sink {
 public:
  virtual ~Sink() = default;
  virtual void push(Value v) = 0;
  virtual void finish() {}
};

class PartitionSink final : public Sink {
 public:
  explicit PartitionSink(storage::Partition& out) : out_(out) {}
  void push(Value v) override { out_.append(std::move(v)); }

 private:
  storage::Partition& out_;
};

const Value& pairAt(const Value& v, const char* op) {
  if (!v.isPair()) fail(ErrorCode::kType, std::string(op) + " needs Pair elements, got " + tagName(v.tag()));
  return v;
}

/// A chain step bound to one partition on one thread.
class Step : public Sink {
 public:
  Step(std::string op, Sink& next, int rank, size_t part) : op_(std::move(op)), next_(next), rank_(rank), part_(part) {}

 protected:
  void guard(const UserFn* fn, const std::function<void()>& body) {
    try {
      body();
    } catch (...) {
      static const UserFn kNone;
      rethrowUserError(op_, fn ? *fn : kNone, rank_, part_, index_);
    }
    ++index_;
  }

  std::string op_;
  Sink& next_;
  int rank_;
  size_t part_;
  size_t index_ = 0;
};

class FnStep final : public Step {
 public:
  FnStep(const std::string& op, Sink& next, const TaskEnv& env, size_t part, int thread, UserFn fn)
      : Step(op, next, env.rank(), part), fn_(std::move(fn)), ctx_(env.ctx) {
    ctx_.vars = fn_.vars();
    ctx_.threadId = thread;
  }

  void push(Value v) override {
    guard(&fn_, [&] {
      if (op_ == "map") {
        next_.push(fn_(ctx_, v));
      } else if (op_ == "filter") {
        Value keep = fn_(ctx_, v);
        if (!keep.isBool()) fail(ErrorCode::kType, std::string("filter predicate returned ") + tagName(keep.tag()));
        if (keep.asBool()) next_.push(std::move(v));
      } else if (op_ == "flatmap") {
        Value out = fn_(ctx_, v);
        if (!out.isList()) fail(ErrorCode::kType, std::string("flatmap function returned ") + tagName(out.tag()));
        for (const Value& x : out.asList()) next_.push(x);
      } else if (op_ == "keyBy") {
        Value k = fn_(ctx_, v);
        next_.push(Value::pair(std::move(k), std::move(v)));
      } else {
        pairAt(v, "mapValues");
        next_.push(Value::pair(v.first(), fn_(ctx_, v.second())));
      }
    });
  }

  void finish() override { next_.finish(); }

 private:
  UserFn fn_;
  Context ctx_;
};

class ProjectStep final : public Step {
 public:
  ProjectStep(const std::string& op, Sink& next, int rank, size_t part) : Step(op, next, rank, part) {}

  void push(Value v) override {
    guard(nullptr, [&] {
      pairAt(v, op_.c_str());
      next_.push(op_ == "keys" ? v.first() : v.second());
    });
  }
  void finish() override { next_.finish(); }
};

class MapPartitionsStep final : public Step {
 public:
  MapPartitionsStep(Sink& next, const TaskEnv& env, size_t part, int thread, UserFn fn)
      : Step("mapPartitions", next, env.rank(), part), fn_(std::move(fn)), ctx_(env.ctx) {
    ctx_.vars = fn_.vars();
    ctx_.threadId = thread;
  }

  void push(Value v) override { buffer_.push_back(std::move(v)); }

  void finish() override {
    Value out;
    try {
      out = fn_(ctx_, Value::list(std::move(buffer_)));
      if (!out.isList()) fail(ErrorCode::kType, std::string("mapPartitions function returned ") + tagName(out.tag()));
    } catch (...) {
      rethrowUserError(op_, fn_, rank_, part_, 0);
    }
    for (const Value& x : out.asList()) next_.push(x);
    next_.finish();
  }

 private:
  UserFn fn_;
  Context ctx_;
  ValueList buffer_;
};

class SampleStep final : public Step {
 public:
  SampleStep(const std::string& op, Sink& next, int rank, size_t part, const Args& args, int64_t globalPart)
      : Step(op, next, rank, part),
        withReplacement_(args.flag("withReplacement")),
        state_(static_cast<uint64_t>(args.i64Or("seed", 0)) ^ static_cast<uint64_t>(globalPart)) {
    if (op == "sample") {
      fraction_ = args.f64("fraction");
      checkFraction(fraction_);
    } else {
      for (const Value& kv : args.get("fractions").asList()) {
        double f = kv.second().isI64() ? static_cast<double>(kv.second().asI64()) : kv.second().asF64();
        checkFraction(f);
        fractions_[kv.first()] = f;
      }
    }
  }

  void push(Value v) override {
    guard(nullptr, [&] {
      double f = fraction_;
      if (op_ == "sampleByKey") {
        pairAt(v, "sampleByKey");
        auto it = fractions_.find(v.first());
        f = it == fractions_.end() ? 0.0 : it->second;
      }
      uint64_t copies = 0;
      if (withReplacement_) {
        copies = poisson(state_, f);
      } else {
        copies = uniform01(state_) < f ? 1 : 0;
      }
      for (uint64_t i = 0; i < copies; ++i) next_.push(v);
    });
  }
  void finish() override { next_.finish(); }

 private:
  void checkFraction(double f) const {
    if (!(f >= 0) || (!withReplacement_ && f > 1)) {
      fail(ErrorCode::kPrecondition, op_ + " fraction " + std::to_string(f) + " is out of range");
    }
  }

  bool withReplacement_;
  uint64_t state_;
  double fraction_ = 0;
  std::unordered_map<Value, double> fractions_;
};

bool needsGlobalIndex(const std::vector<OpSpec>& chain) {
  for (const OpSpec& op : chain) {
    if (op.name == "sample" || op.name == "sampleByKey") return true;
  }
  return false;
}

}  // namespace

Dataset runChain(const TaskEnv& env, const Dataset& input, const std::vector<OpSpec>& chain) {
  if (chain.empty()) return input;
  for (const OpSpec& op : chain) {
    if (!isNarrowOp(op.name)) fail(ErrorCode::kProtocol, "'" + op.name + "' cannot run in a fused pass");
  }
  // Resolve once so arity and lookup errors surface before any element runs.
  std::vector<std::optional<UserFn>> fns;
  for (const OpSpec& op : chain) {
    if (op.args.has("fn")) {
      fns.emplace_back(env.fn(op.args.get("fn"), 1));
    } else {
      fns.emplace_back();
    }
  }
  int64_t partOffset = 0;
  if (needsGlobalIndex(chain)) {
    partOffset = globalOffset(env.ctx.comm, static_cast<int64_t>(input.parts.size())).offset;
  }

  Dataset out;
  out.parts.resize(input.parts.size());
  parallelFor(input.parts.size(), env.threads, [&](size_t j, int thread) {
    PartRef dst = env.newPartition(j);
    PartitionSink sink(*dst);
    std::vector<std::unique_ptr<Step>> steps(chain.size());
    Sink* next = &sink;
    for (size_t s = chain.size(); s-- > 0;) {
      const OpSpec& op = chain[s];
      if (op.name == "keys" || op.name == "values") {
        steps[s] = std::make_unique<ProjectStep>(op.name, *next, env.rank(), j);
      } else if (op.name == "mapPartitions") {
        steps[s] = std::make_unique<MapPartitionsStep>(*next, env, j, thread, *fns[s]);
      } else if (op.name == "sample" || op.name == "sampleByKey") {
        steps[s] = std::make_unique<SampleStep>(op.name, *next, env.rank(), j, op.args,
                                                partOffset + static_cast<int64_t>(j));
      } else {
        steps[s] = std::make_unique<FnStep>(op.name, *next, env, j, thread, *fns[s]);
      }
      next = steps[s].get();
    }
    Sink& head = *steps.front();
    input.parts[j]->forEach([&](const Value& v) { head.push(v); });
    head.finish();
    if (env.metrics) env.metrics->partitionPasses.fetch_add(1);
    out.parts[j] = std::move(dst);
  });
  // Narrow operators keep the placement but not necessarily the keys.
  bool keysKept = true;
  for (const OpSpec& op : chain) {
    if (op.name != "filter" && op.name != "mapValues" && op.name != "sample" && op.name != "sampleByKey") {
      keysKept = false;
    }
  }
  out.keyParts = keysKept ? input.keyParts : 0;
  return out;
}

}  // namespace ignis::executor
