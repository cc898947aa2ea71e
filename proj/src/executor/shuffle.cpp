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


#include <algorithm>
#include <queue>
#include <unordered_map>

#include "ignis/executor/ops.hpp"

namespace ignis::executor {

namespace {

/// Sends outboxes[r] to rank r and returns what every rank sent here, in rank
/// order. Only traffic to other ranks counts as exchange messages.
std::vector<ValueList> exchange(const TaskEnv& env, std::vector<ValueList> outboxes) {
  int p = env.size();
  if (p == 1) return {std::move(outboxes[0])};
  std::vector<std::string> wire(p);
  uint64_t bytes = 0;
  for (int r = 0; r < p; ++r) {
    wire[r] = serializeValue(Value::list(std::move(outboxes[r])));
    if (r != env.rank()) bytes += wire[r].size();
  }
  std::vector<std::string> in = env.comm().alltoall(std::move(wire));
  if (env.metrics) {
    env.metrics->exchangeMessages.fetch_add(static_cast<uint64_t>(p - 1));
    env.metrics->exchangeBytes.fetch_add(bytes);
  }
  std::vector<ValueList> out(p);
  for (int r = 0; r < p; ++r) out[r] = deserializeValue(in[r]).asList();
  return out;
}

const Value& asPair(const Value& v, const char* op) {
  if (!v.isPair()) fail(ErrorCode::kType, std::string(op) + " needs Pair elements, got " + tagName(v.tag()));
  return v;
}

const char* keyedName(KeyedKind kind) {
  switch (kind) {
    case KeyedKind::kGroup: return "groupByKey";
    case KeyedKind::kReduce: return "reduceByKey";
    case KeyedKind::kAggregate: return "aggregateByKey";
    case KeyedKind::kCountByKey: return "countByKey";
    case KeyedKind::kCountByValue: return "countByValue";
    case KeyedKind::kDistinct: return "distinct";
  }
  return "?";
}

/// Per-key state in first-appearance order.
class Combiner {
 public:
  Combiner(const TaskEnv& env, KeyedKind kind, const Args& args) : env_(env), kind_(kind) {
    ctx_ = env.ctx;
    switch (kind) {
      case KeyedKind::kGroup:
        if (args.has("fn")) keyFn_ = env.fn(args.get("fn"), 1);
        break;
      case KeyedKind::kReduce:
        op_ = env.fn(args.get("fn"), 2);
        ctx_.vars = op_->vars();
        break;
      case KeyedKind::kAggregate:
        zero_ = args.get("zero");
        seqOp_ = env.fn(args.get("seqOp"), 2);
        op_ = env.fn(args.get("combOp"), 2);
        break;
      default:
        break;
    }
    if (keyFn_) ctx_.vars = keyFn_->vars();
  }

  /// Adds one input element.
  void add(const Value& x) {
    switch (kind_) {
      case KeyedKind::kGroup:
        if (keyFn_) {
          lists_[slot((*keyFn_)(ctx_, x))].push_back(x);
        } else {
          asPair(x, "groupByKey");
          lists_[slot(x.first())].push_back(x.second());
        }
        break;
      case KeyedKind::kReduce: {
        asPair(x, "reduceByKey");
        bool fresh = false;
        size_t s = slot(x.first(), &fresh);
        accs_[s] = fresh ? x.second() : (*op_)(opCtx(), accs_[s], x.second());
        break;
      }
      case KeyedKind::kAggregate: {
        asPair(x, "aggregateByKey");
        bool fresh = false;
        size_t s = slot(x.first(), &fresh);
        Context c = env_.ctx;
        c.vars = seqOp_->vars();
        accs_[s] = (*seqOp_)(c, fresh ? zero_ : accs_[s], x.second());
        break;
      }
      case KeyedKind::kCountByKey:
        asPair(x, "countByKey");
        bump(x.first(), 1);
        break;
      case KeyedKind::kCountByValue: bump(x, 1); break;
      case KeyedKind::kDistinct: slot(x); break;
    }
  }

  /// Merges a combined entry produced by another combiner.
  void merge(const Value& entry) {
    if (kind_ == KeyedKind::kDistinct) {
      slot(entry);
      return;
    }
    const Value& k = entry.first();
    const Value& acc = entry.second();
    bool fresh = false;
    size_t s = slot(k, &fresh);
    switch (kind_) {
      case KeyedKind::kGroup: {
        auto& dst = lists_[s];
        dst.insert(dst.end(), acc.asList().begin(), acc.asList().end());
        break;
      }
      case KeyedKind::kReduce:
      case KeyedKind::kAggregate: accs_[s] = fresh ? acc : (*op_)(opCtx(), accs_[s], acc); break;
      default: accs_[s] = Value::i64((fresh ? 0 : accs_[s].asI64()) + acc.asI64()); break;
    }
  }

  size_t size() const { return keys_.size(); }
  const Value& key(size_t i) const { return keys_[i]; }

  /// Entry i in wire form (also the output element for every kind except
  /// distinct, whose output is the key itself).
  Value entry(size_t i) {
    switch (kind_) {
      case KeyedKind::kDistinct: return keys_[i];
      case KeyedKind::kGroup: return Value::pair(keys_[i], Value::list(std::move(lists_[i])));
      default: return Value::pair(keys_[i], std::move(accs_[i]));
    }
  }

  void emit(storage::Partition& out) {
    for (size_t i = 0; i < size(); ++i) out.append(entry(i));
  }

  std::string opName() const { return keyedName(kind_); }
  const UserFn& errorFn() const {
    static const UserFn kNone;
    if (op_) return *op_;
    if (keyFn_) return *keyFn_;
    return kNone;
  }

 private:
  Context& opCtx() {
    if (op_) ctx_.vars = op_->vars();
    return ctx_;
  }

  size_t slot(const Value& k, bool* fresh = nullptr) {
    auto [it, inserted] = index_.try_emplace(k, keys_.size());
    if (inserted) {
      keys_.push_back(k);
      accs_.emplace_back();
      if (kind_ == KeyedKind::kGroup) lists_.emplace_back();
    }
    if (fresh) *fresh = inserted;
    return it->second;
  }

  void bump(const Value& k, int64_t by) {
    bool fresh = false;
    size_t s = slot(k, &fresh);
    accs_[s] = Value::i64((fresh ? 0 : accs_[s].asI64()) + by);
  }

  const TaskEnv& env_;
  KeyedKind kind_;
  Context ctx_;
  std::optional<UserFn> keyFn_;
  std::optional<UserFn> op_;
  std::optional<UserFn> seqOp_;
  Value zero_;
  std::vector<Value> keys_;
  std::vector<Value> accs_;
  std::vector<ValueList> lists_;
  std::unordered_map<Value, size_t> index_;
};

int64_t partitionOfKey(const Value& k, int64_t n) { return static_cast<int64_t>(hashValue(k) % static_cast<uint64_t>(n)); }

}  // namespace

Dataset keyedAggregate(const TaskEnv& env, const Dataset& input, KeyedKind kind, const Args& args) {
  int p = env.size();
  bool byPairKey = kind == KeyedKind::kReduce || kind == KeyedKind::kAggregate || kind == KeyedKind::kCountByKey ||
                   (kind == KeyedKind::kGroup && !args.has("fn"));
  int64_t n = args.i64Or("partitions", 0);
  if (n <= 0) n = byPairKey && input.keyParts > 0 ? input.keyParts : p;
  bool confined = byPairKey && input.keyParts == n;
  Dataset out;
  out.keyParts = kind == KeyedKind::kDistinct ? 0 : static_cast<int>(n);

  if (confined) {
    out.parts.resize(input.parts.size());
    parallelFor(input.parts.size(), env.threads, [&](size_t j, int) {
      Combiner c(env, kind, args);
      size_t idx = 0;
      input.parts[j]->forEach([&](const Value& x) {
        try {
          c.add(x);
        } catch (...) {
          rethrowUserError(c.opName(), c.errorFn(), env.rank(), j, idx);
        }
        ++idx;
      });
      out.parts[j] = env.newPartition(j);
      c.emit(*out.parts[j]);
      if (env.metrics) env.metrics->partitionPasses.fetch_add(1);
    });
    return out;
  }

  Combiner local(env, kind, args);
  for (size_t j = 0; j < input.parts.size(); ++j) {
    size_t idx = 0;
    input.parts[j]->forEach([&](const Value& x) {
      try {
        local.add(x);
      } catch (...) {
        rethrowUserError(local.opName(), local.errorFn(), env.rank(), j, idx);
      }
      ++idx;
    });
    if (env.metrics) env.metrics->partitionPasses.fetch_add(1);
  }
  std::vector<ValueList> outboxes(p);
  for (size_t i = 0; i < local.size(); ++i) {
    int dst = blockOwner(partitionOfKey(local.key(i), n), n, p);
    outboxes[dst].push_back(local.entry(i));
  }
  std::vector<ValueList> in = exchange(env, std::move(outboxes));
  int64_t lo = blockStart(env.rank(), n, p);
  int64_t hi = blockStart(env.rank() + 1, n, p);
  std::vector<Combiner> merged;
  merged.reserve(static_cast<size_t>(hi - lo));
  for (int64_t j = lo; j < hi; ++j) merged.emplace_back(env, kind, args);
  for (int r = 0; r < p; ++r) {
    size_t idx = 0;
    for (const Value& e : in[r]) {
      const Value& k = kind == KeyedKind::kDistinct ? e : e.first();
      int64_t j = partitionOfKey(k, n);
      try {
        merged[static_cast<size_t>(j - lo)].merge(e);
      } catch (...) {
        rethrowUserError(local.opName(), local.errorFn(), env.rank(), static_cast<size_t>(j), idx);
      }
      ++idx;
    }
  }
  for (int64_t j = lo; j < hi; ++j) {
    PartRef part = env.newPartition(static_cast<size_t>(j - lo));
    merged[static_cast<size_t>(j - lo)].emit(*part);
    out.parts.push_back(std::move(part));
  }
  return out;
}

Dataset joinDatasets(const TaskEnv& env, const Dataset& left, const Dataset& right, const Args& args) {
  int p = env.size();
  int64_t n = args.i64Or("partitions", 0);
  if (n <= 0) n = left.keyParts > 0 ? left.keyParts : (right.keyParts > 0 ? right.keyParts : p);
  bool leftPlaced = left.keyParts == n;
  bool rightPlaced = right.keyParts == n;
  int64_t lo = blockStart(env.rank(), n, p);
  size_t owned = static_cast<size_t>(blockStart(env.rank() + 1, n, p) - lo);
  std::vector<ValueList> lparts(owned);
  std::vector<ValueList> rparts(owned);

  auto placeLocal = [&](const Dataset& ds, std::vector<ValueList>& dst) {
    for (size_t j = 0; j < ds.parts.size(); ++j) {
      ds.parts[j]->forEach([&](const Value& x) { dst[j].push_back(x); });
    }
  };
  if (leftPlaced) placeLocal(left, lparts);
  if (rightPlaced) placeLocal(right, rparts);
  if (!leftPlaced || !rightPlaced) {
    std::vector<ValueList> lout(p);
    std::vector<ValueList> rout(p);
    auto route = [&](const Dataset& ds, std::vector<ValueList>& boxes) {
      for (const PartRef& part : ds.parts) {
        part->forEach([&](const Value& x) {
          asPair(x, "join");
          boxes[blockOwner(partitionOfKey(x.first(), n), n, p)].push_back(x);
        });
      }
    };
    if (!leftPlaced) route(left, lout);
    if (!rightPlaced) route(right, rout);
    std::vector<ValueList> boxes(p);
    for (int r = 0; r < p; ++r) {
      boxes[r] = {Value::list(std::move(lout[r])), Value::list(std::move(rout[r]))};
    }
    std::vector<ValueList> in = exchange(env, std::move(boxes));
    for (int r = 0; r < p; ++r) {
      for (const Value& x : in[r][0].asList()) lparts[partitionOfKey(x.first(), n) - lo].push_back(x);
      for (const Value& x : in[r][1].asList()) rparts[partitionOfKey(x.first(), n) - lo].push_back(x);
    }
  }
  Dataset out;
  out.keyParts = static_cast<int>(n);
  for (size_t j = 0; j < owned; ++j) {
    std::unordered_map<Value, std::vector<const Value*>> byKey;
    for (const Value& x : rparts[j]) byKey[asPair(x, "join").first()].push_back(&x.second());
    PartRef part = env.newPartition(j);
    for (const Value& x : lparts[j]) {
      asPair(x, "join");
      auto it = byKey.find(x.first());
      if (it == byKey.end()) continue;
      for (const Value* w : it->second) part->append(Value::pair(x.first(), Value::pair(x.second(), *w)));
    }
    out.parts.push_back(std::move(part));
  }
  return out;
}

Dataset unionDatasets(const Dataset& left, const Dataset& right) {
  Dataset out;
  out.parts = left.parts;
  out.parts.insert(out.parts.end(), right.parts.begin(), right.parts.end());
  return out;
}

std::vector<size_t> samplePositions(size_t m, int p) {
  std::vector<size_t> out;
  if (m == 0) return out;
  for (int j = 0; j < p; ++j) out.push_back(static_cast<size_t>(j) * m / static_cast<size_t>(p));
  return out;
}

std::vector<size_t> pivotIndices(size_t samples, int p) {
  std::vector<size_t> out;
  if (samples == 0) return out;
  int64_t s = static_cast<int64_t>(samples);
  for (int i = 1; i < p; ++i) {
    int64_t idx = i * s / p + (s / p) / 2 - 1;
    out.push_back(static_cast<size_t>(std::clamp<int64_t>(idx, 0, s - 1)));
  }
  return out;
}

Dataset sortDataset(const TaskEnv& env, const Dataset& input, const Args& args) {
  int p = env.size();
  bool ascending = args.flag("ascending", true);
  std::optional<UserFn> keyFn;
  Context ctx = env.ctx;
  if (args.has("fn")) {
    keyFn = env.fn(args.get("fn"), 1);
    ctx.vars = keyFn->vars();
  }
  auto less = [ascending](const Value& a, const Value& b) {
    return ascending ? compareValues(a, b) < 0 : compareValues(b, a) < 0;
  };

  // Keys are carried only when they differ from the elements.
  std::vector<std::pair<Value, Value>> items;
  items.reserve(input.size());
  for (size_t j = 0; j < input.parts.size(); ++j) {
    size_t idx = 0;
    input.parts[j]->forEach([&](const Value& x) {
      if (keyFn) {
        try {
          items.emplace_back((*keyFn)(ctx, x), x);
        } catch (...) {
          rethrowUserError("sortBy", *keyFn, env.rank(), j, idx);
        }
      } else {
        items.emplace_back(x, Value());
      }
      ++idx;
    });
    if (env.metrics) env.metrics->partitionPasses.fetch_add(1);
  }
  std::stable_sort(items.begin(), items.end(), [&](const auto& a, const auto& b) { return less(a.first, b.first); });

  auto emit = [&](std::vector<std::pair<Value, Value>>& sorted) {
    Dataset out;
    PartRef part = env.newPartition(0);
    for (auto& [k, x] : sorted) part->append(keyFn ? std::move(x) : std::move(k));
    out.parts.push_back(std::move(part));
    return out;
  };
  if (p == 1) return emit(items);

  ValueList samples;
  for (size_t pos : samplePositions(items.size(), p)) samples.push_back(items[pos].first);
  std::vector<std::string> gathered = env.comm().gather(0, serializeValue(Value::list(std::move(samples))));
  std::string pivotWire;
  if (env.rank() == 0) {
    ValueList all;
    for (const std::string& g : gathered) {
      ValueList part = deserializeValue(g).asList();
      all.insert(all.end(), part.begin(), part.end());
    }
    std::stable_sort(all.begin(), all.end(), less);
    ValueList pivots;
    for (size_t idx : pivotIndices(all.size(), p)) pivots.push_back(all[idx]);
    pivotWire = serializeValue(Value::list(std::move(pivots)));
  }
  ValueList pivots = deserializeValue(env.comm().broadcast(0, std::move(pivotWire))).asList();

  std::vector<ValueList> outboxes(p);
  for (auto& [k, x] : items) {
    size_t b = static_cast<size_t>(std::upper_bound(pivots.begin(), pivots.end(), k, less) - pivots.begin());
    outboxes[b].push_back(keyFn ? Value::pair(std::move(k), std::move(x)) : std::move(k));
  }
  items.clear();
  std::vector<ValueList> runs = exchange(env, std::move(outboxes));

  // Stable p-way merge: equal keys keep source-rank order.
  auto keyOf = [&](int r, size_t i) -> const Value& { return keyFn ? runs[r][i].first() : runs[r][i]; };
  auto after = [&](const std::pair<int, size_t>& a, const std::pair<int, size_t>& b) {
    const Value& ka = keyOf(a.first, a.second);
    const Value& kb = keyOf(b.first, b.second);
    if (less(kb, ka)) return true;
    if (less(ka, kb)) return false;
    return a.first > b.first;
  };
  std::priority_queue<std::pair<int, size_t>, std::vector<std::pair<int, size_t>>, decltype(after)> heap(after);
  for (int r = 0; r < p; ++r) {
    if (!runs[r].empty()) heap.emplace(r, 0);
  }
  Dataset out;
  PartRef part = env.newPartition(0);
  while (!heap.empty()) {
    auto [r, i] = heap.top();
    heap.pop();
    part->append(keyFn ? runs[r][i].second() : runs[r][i]);
    if (i + 1 < runs[r].size()) heap.emplace(r, i + 1);
  }
  out.parts.push_back(std::move(part));
  return out;
}

Dataset repartitionDataset(const TaskEnv& env, const Dataset& input, int64_t n) {
  if (n < 1) fail(ErrorCode::kPrecondition, "repartition needs at least one partition");
  int p = env.size();
  GlobalOffset g = globalOffset(env.ctx.comm, static_cast<int64_t>(input.size()));
  std::vector<ValueList> outboxes(p);
  int64_t idx = g.offset;
  for (const PartRef& part : input.parts) {
    part->forEach([&](const Value& x) {
      int64_t j = evenPartitionOf(idx++, g.total, n);
      outboxes[blockOwner(j, n, p)].push_back(Value::pair(Value::i64(j), x));
    });
  }
  std::vector<ValueList> in = exchange(env, std::move(outboxes));
  int64_t lo = blockStart(env.rank(), n, p);
  int64_t hi = blockStart(env.rank() + 1, n, p);
  Dataset out;
  for (int64_t j = lo; j < hi; ++j) out.parts.push_back(env.newPartition(static_cast<size_t>(j - lo)));
  for (const ValueList& box : in) {
    for (const Value& e : box) out.parts[static_cast<size_t>(e.first().asI64() - lo)]->append(e.second());
  }
  return out;
}

Dataset partitionByDataset(const TaskEnv& env, const Dataset& input, const Args& args) {
  int64_t n = args.i64("partitions");
  if (n < 1) fail(ErrorCode::kPrecondition, "partitionBy needs at least one partition");
  int p = env.size();
  std::optional<UserFn> keyFn;
  Context ctx = env.ctx;
  if (args.has("fn")) {
    keyFn = env.fn(args.get("fn"), 1);
    ctx.vars = keyFn->vars();
  }
  std::vector<ValueList> outboxes(p);
  for (size_t jp = 0; jp < input.parts.size(); ++jp) {
    size_t idx = 0;
    input.parts[jp]->forEach([&](const Value& x) {
      int64_t j = 0;
      try {
        j = partitionOfKey(keyFn ? (*keyFn)(ctx, x) : asPair(x, "partitionBy").first(), n);
      } catch (...) {
        static const UserFn kNone;
        rethrowUserError("partitionBy", keyFn ? *keyFn : kNone, env.rank(), jp, idx);
      }
      ++idx;
      outboxes[blockOwner(j, n, p)].push_back(Value::pair(Value::i64(j), x));
    });
  }
  std::vector<ValueList> in = exchange(env, std::move(outboxes));
  int64_t lo = blockStart(env.rank(), n, p);
  int64_t hi = blockStart(env.rank() + 1, n, p);
  Dataset out;
  out.keyParts = keyFn ? 0 : static_cast<int>(n);
  for (int64_t j = lo; j < hi; ++j) out.parts.push_back(env.newPartition(static_cast<size_t>(j - lo)));
  for (const ValueList& box : in) {
    for (const Value& e : box) out.parts[static_cast<size_t>(e.first().asI64() - lo)]->append(e.second());
  }
  return out;
}

}  // namespace ignis::executor
