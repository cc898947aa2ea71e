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
#include <unordered_map>

#include "ignis/executor/ops.hpp"

namespace ignis::executor {

namespace {

/// Wraps a partial result so empty executors take part in reductions.
Value some(Value v) { return Value::list({std::move(v)}); }
const Value& none() {
  static const Value kNone = Value::list({});
  return kNone;
}

int treeMode(const Args& args) {
  if (!args.has("tree")) return -1;
  return args.flag("tree") ? 1 : 0;
}

}  // namespace

int64_t countAction(const TaskEnv& env, const Dataset& input) {
  auto local = static_cast<int64_t>(input.size());
  if (!env.ctx.comm || env.size() == 1) return local;
  return env.comm()
      .allreduce(Value::i64(local), [](const Value& a, const Value& b) { return Value::i64(a.asI64() + b.asI64()); })
      .asI64();
}

Value reduceAction(const TaskEnv& env, const Dataset& input, const Args& args) {
  UserFn op = env.fn(args.get("fn"), 2);
  Context ctx = env.ctx;
  ctx.vars = op.vars();
  Value acc = none();
  for (size_t j = 0; j < input.parts.size(); ++j) {
    size_t idx = 0;
    input.parts[j]->forEach([&](const Value& x) {
      try {
        acc = acc.asList().empty() ? some(x) : some(op(ctx, acc.asList()[0], x));
      } catch (...) {
        rethrowUserError("reduce", op, env.rank(), j, idx);
      }
      ++idx;
    });
  }
  if (env.size() == 1) return acc;
  return env.comm().reduce(
      0, acc,
      [&](const Value& a, const Value& b) {
        if (a.asList().empty()) return b;
        if (b.asList().empty()) return a;
        return some(op(ctx, a.asList()[0], b.asList()[0]));
      },
      treeMode(args));
}

Value aggregateAction(const TaskEnv& env, const Dataset& input, const Args& args, bool fold) {
  Value zero = args.get("zero");
  UserFn seqOp = env.fn(args.get(fold ? "fn" : "seqOp"), 2);
  UserFn combOp = env.fn(args.get(fold ? "fn" : "combOp"), 2);
  Context seqCtx = env.ctx;
  seqCtx.vars = seqOp.vars();
  Context combCtx = env.ctx;
  combCtx.vars = combOp.vars();
  Value acc = zero;
  for (size_t j = 0; j < input.parts.size(); ++j) {
    Value part = zero;
    size_t idx = 0;
    input.parts[j]->forEach([&](const Value& x) {
      try {
        part = seqOp(seqCtx, part, x);
      } catch (...) {
        rethrowUserError(fold ? "fold" : "aggregate", seqOp, env.rank(), j, idx);
      }
      ++idx;
    });
    try {
      acc = combOp(combCtx, acc, part);
    } catch (...) {
      rethrowUserError(fold ? "fold" : "aggregate", combOp, env.rank(), j, idx);
    }
  }
  if (env.size() == 1) return acc;
  return env.comm().reduce(
      0, acc, [&](const Value& a, const Value& b) { return combOp(combCtx, a, b); }, treeMode(args));
}

Value extremeAction(const TaskEnv& env, const Dataset& input, const Args& args, bool max) {
  std::optional<UserFn> keyFn;
  Context ctx = env.ctx;
  if (args.has("fn")) {
    keyFn = env.fn(args.get("fn"), 1);
    ctx.vars = keyFn->vars();
  }
  // Candidates are Pair(key, element); ties keep the leftmost.
  auto better = [max](const Value& cand, const Value& best) {
    auto c = compareValues(cand.first(), best.first());
    return max ? c > 0 : c < 0;
  };
  Value best = none();
  for (size_t j = 0; j < input.parts.size(); ++j) {
    size_t idx = 0;
    input.parts[j]->forEach([&](const Value& x) {
      Value cand;
      try {
        cand = Value::pair(keyFn ? (*keyFn)(ctx, x) : x, x);
      } catch (...) {
        rethrowUserError(max ? "max" : "min", *keyFn, env.rank(), j, idx);
      }
      if (best.asList().empty() || better(cand, best.asList()[0])) best = some(std::move(cand));
      ++idx;
    });
  }
  if (env.size() > 1) {
    best = env.comm().reduce(0, best, [&](const Value& a, const Value& b) {
      if (a.asList().empty()) return b;
      if (b.asList().empty()) return a;
      return better(b.asList()[0], a.asList()[0]) ? b : a;
    });
  }
  if (best.isList() && !best.asList().empty()) return some(best.asList()[0].second());
  return best;
}

std::vector<Value> takeLocal(const Dataset& input, int64_t n) {
  std::vector<Value> out;
  if (n <= 0) return out;
  for (const PartRef& part : input.parts) {
    if (static_cast<int64_t>(out.size()) >= n) break;
    part->forEach([&](const Value& x) {
      if (static_cast<int64_t>(out.size()) < n) out.push_back(x);
    });
  }
  return out;
}

std::vector<Value> topLocal(const TaskEnv& env, const Dataset& input, const Args& args) {
  int64_t n = args.i64("n");
  std::optional<UserFn> keyFn;
  Context ctx = env.ctx;
  if (args.has("fn")) {
    keyFn = env.fn(args.get("fn"), 1);
    ctx.vars = keyFn->vars();
  }
  std::vector<Value> cands;
  if (n <= 0) return cands;
  for (size_t j = 0; j < input.parts.size(); ++j) {
    size_t idx = 0;
    input.parts[j]->forEach([&](const Value& x) {
      try {
        cands.push_back(Value::pair(keyFn ? (*keyFn)(ctx, x) : x, x));
      } catch (...) {
        rethrowUserError("top", *keyFn, env.rank(), j, idx);
      }
      ++idx;
    });
  }
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Value& a, const Value& b) { return compareValues(a.first(), b.first()) > 0; });
  if (static_cast<int64_t>(cands.size()) > n) cands.resize(static_cast<size_t>(n));
  return cands;
}

std::vector<int64_t> sampleIndices(int64_t total, int64_t n, bool withReplacement, uint64_t seed) {
  std::vector<int64_t> out;
  if (total <= 0 || n <= 0) return out;
  uint64_t state = seed;
  if (withReplacement) {
    for (int64_t i = 0; i < n; ++i) out.push_back(static_cast<int64_t>(splitmix64(state) % static_cast<uint64_t>(total)));
    return out;
  }
  // Sparse Fisher-Yates over [0, total).
  int64_t k = std::min(n, total);
  std::unordered_map<int64_t, int64_t> swapped;
  auto at = [&](int64_t i) {
    auto it = swapped.find(i);
    return it == swapped.end() ? i : it->second;
  };
  for (int64_t i = 0; i < k; ++i) {
    int64_t j = i + static_cast<int64_t>(splitmix64(state) % static_cast<uint64_t>(total - i));
    int64_t vi = at(i);
    int64_t vj = at(j);
    swapped[i] = vj;
    swapped[j] = vi;
    out.push_back(vj);
  }
  return out;
}

std::vector<Value> takeSampleLocal(const TaskEnv& env, const Dataset& input, const Args& args) {
  auto local = static_cast<int64_t>(input.size());
  GlobalOffset g = globalOffset(env.ctx.comm, local);
  std::vector<int64_t> draws = sampleIndices(g.total, args.i64("n"), args.flag("withReplacement"),
                                             static_cast<uint64_t>(args.i64Or("seed", 0)));
  std::unordered_map<int64_t, std::vector<int64_t>> mine;
  for (size_t d = 0; d < draws.size(); ++d) {
    if (draws[d] >= g.offset && draws[d] < g.offset + local) mine[draws[d] - g.offset].push_back(static_cast<int64_t>(d));
  }
  std::vector<Value> out;
  if (mine.empty()) return out;
  int64_t idx = 0;
  for (const PartRef& part : input.parts) {
    part->forEach([&](const Value& x) {
      if (auto it = mine.find(idx); it != mine.end()) {
        for (int64_t d : it->second) out.push_back(Value::pair(Value::i64(d), x));
      }
      ++idx;
    });
  }
  return out;
}

}  // namespace ignis::executor
