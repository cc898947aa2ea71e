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
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ignis/error.hpp"
#include "ignis/executor/registry.hpp"

namespace ignis::executor {

namespace {

double num(const Value& v) { return v.isI64() ? static_cast<double>(v.asI64()) : v.asF64(); }

size_t nearest(const ValueList& point, const ValueList& centroids) {
  size_t best = 0;
  double bestDist = std::numeric_limits<double>::infinity();
  for (size_t c = 0; c < centroids.size(); ++c) {
    const ValueList& ctr = centroids[c].asList();
    double d = 0;
    for (size_t i = 0; i < point.size(); ++i) {
      double diff = num(point[i]) - num(ctr[i]);
      d += diff * diff;
    }
    if (d < bestDist) {
      bestDist = d;
      best = c;
    }
  }
  return best;
}

Value vectorSum(const Value& a, const Value& b) {
  const ValueList& x = a.asList();
  const ValueList& y = b.asList();
  ValueList out;
  out.reserve(x.size());
  for (size_t i = 0; i < x.size(); ++i) out.push_back(Value::f64(num(x[i]) + num(y[i])));
  return Value::list(std::move(out));
}

/// Merge of two key-sorted List[Pair(Str, I64)] count tables.
Value mergeCounts(const Value& a, const Value& b) {
  const ValueList& x = a.asList();
  const ValueList& y = b.asList();
  ValueList out;
  size_t i = 0;
  size_t j = 0;
  while (i < x.size() || j < y.size()) {
    if (j == y.size() || (i < x.size() && x[i].first() < y[j].first())) {
      out.push_back(x[i++]);
    } else if (i == x.size() || y[j].first() < x[i].first()) {
      out.push_back(y[j++]);
    } else {
      out.push_back(Value::pair(x[i].first(), Value::i64(x[i].second().asI64() + y[j].second().asI64())));
      ++i;
      ++j;
    }
  }
  return Value::list(std::move(out));
}

std::vector<int64_t> integers(const std::string& s) {
  std::vector<int64_t> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) {
    size_t used = 0;
    int64_t v = 0;
    try {
      v = std::stoll(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) return {};
    out.push_back(v);
  }
  return out;
}

uint64_t mix(uint64_t h, uint64_t x) {
  h ^= x;
  h *= 0x100000001b3ULL;
  return h ^ (h >> 29);
}

}  // namespace

void registerWorkloadsBundle(Registry& r) {
  // "src dst" -> Pair(I64 src, I64 dst).
  r.addFn1("parseEdge", [](Context&, const Value& line) {
    std::vector<int64_t> f = integers(line.asStr());
    if (f.size() != 2) throw Error(ErrorCode::kUserFunction, "parseEdge: expected two integers in '" + line.asStr() + "'");
    return Value::pair(Value::i64(f[0]), Value::i64(f[1]));
  });
  // Whitespace-separated numbers -> List[F64].
  r.addFn1("parseVector", [](Context&, const Value& line) {
    ValueList out;
    std::istringstream in(line.asStr());
    std::string tok;
    while (in >> tok) {
      size_t used = 0;
      double v = 0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size()) throw Error(ErrorCode::kUserFunction, "parseVector: not a number '" + tok + "'");
      out.push_back(Value::f64(v));
    }
    return Value::list(std::move(out));
  });
  // Sort record -> Pair(Str key, Str line), the key being the first 10 bytes.
  r.addFn1("teraSplit", [](Context&, const Value& line) {
    const std::string& s = line.asStr();
    return Value::pair(Value::str(s.substr(0, std::min<size_t>(10, s.size()))), line);
  });

  // Hybrid wordcount: local count, then an allreduce over the base
  // communicator; rank 0 emits the merged table.
  r.addCall("wordcountMerge", 1, [](Context& ctx, const std::vector<Value>* words) {
    std::map<std::string, int64_t> local;
    for (const Value& w : *words) ++local[w.asStr()];
    ValueList table;
    for (const auto& [w, n] : local) table.push_back(Value::pair(Value::str(w), Value::i64(n)));
    Value merged = ctx.base().allreduce(Value::list(std::move(table)), mergeCounts);
    std::vector<Value> out;
    if (ctx.executorRank == 0) out = merged.asList();
    return out;
  });

  r.addFn1("kmeansAssign", [](Context& ctx, const Value& point) {
    size_t c = nearest(point.asList(), ctx.var("centroids").asList());
    return Value::pair(Value::i64(static_cast<int64_t>(c)), Value::pair(point, Value::i64(1)));
  });
  r.addFn2("kmeansMerge", [](Context&, const Value& a, const Value& b) {
    return Value::pair(vectorSum(a.first(), b.first()), Value::i64(a.second().asI64() + b.second().asI64()));
  });
  // One Lloyd step over the executor's points; partial sums are shared with
  // an allreduce so every executor derives the same centroids.
  r.addIteration("kmeansStep", [](Context& ctx, const std::vector<Value>& points, const Value& state) {
    const ValueList& centroids = state.asList();
    size_t k = centroids.size();
    size_t dim = k == 0 ? 0 : centroids[0].asList().size();
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<int64_t> counts(k, 0);
    for (const Value& p : points) {
      const ValueList& x = p.asList();
      size_t c = nearest(x, centroids);
      for (size_t i = 0; i < dim; ++i) sums[c][i] += num(x[i]);
      ++counts[c];
    }
    ValueList partial;
    for (size_t c = 0; c < k; ++c) {
      ValueList s;
      for (double v : sums[c]) s.push_back(Value::f64(v));
      partial.push_back(Value::pair(Value::list(std::move(s)), Value::i64(counts[c])));
    }
    Value total = ctx.base().allreduce(Value::list(std::move(partial)), [](const Value& a, const Value& b) {
      ValueList out;
      for (size_t c = 0; c < a.asList().size(); ++c) {
        const Value& x = a.asList()[c];
        const Value& y = b.asList()[c];
        out.push_back(Value::pair(vectorSum(x.first(), y.first()), Value::i64(x.second().asI64() + y.second().asI64())));
      }
      return Value::list(std::move(out));
    });
    double epsilon = ctx.vars.count("epsilon") ? num(ctx.var("epsilon")) : -1.0;
    double shift = 0;
    ValueList next;
    for (size_t c = 0; c < k; ++c) {
      const Value& t = total.asList()[c];
      int64_t n = t.second().asI64();
      if (n == 0) {
        next.push_back(centroids[c]);
        continue;
      }
      ValueList ctr;
      for (size_t i = 0; i < dim; ++i) {
        double v = num(t.first().asList()[i]) / static_cast<double>(n);
        shift = std::max(shift, std::abs(v - num(centroids[c].asList()[i])));
        ctr.push_back(Value::f64(v));
      }
      next.push_back(Value::list(std::move(ctr)));
    }
    return IterationStep{Value::list(std::move(next)), shift <= epsilon};
  });

  // Row Pair(src, Pair(List links, rank)). The zero self entry keeps vertices
  // without in-links in the next rank table.
  r.addFn1("pagerankContribs", [](Context&, const Value& row) {
    const ValueList& links = row.second().first().asList();
    double share = num(row.second().second()) / static_cast<double>(links.size());
    ValueList out;
    out.reserve(links.size() + 1);
    out.push_back(Value::pair(row.first(), Value::f64(0.0)));
    for (const Value& dst : links) out.push_back(Value::pair(dst, Value::f64(share)));
    return Value::list(std::move(out));
  });
  // Order-independent sum: identical for every partitioning of the terms.
  r.addFn1("sortedSum", [](Context&, const Value& xs) {
    std::vector<double> v;
    for (const Value& x : xs.asList()) v.push_back(num(x));
    std::sort(v.begin(), v.end());
    double s = 0;
    for (double x : v) s += x;
    return Value::f64(s);
  });

  // Mining simulation: a data-intensive parse followed by a compute-intensive
  // hash loop.
  r.addFn1("mineParse", [](Context&, const Value& line) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : line.asStr()) h = mix(h, c);
    return Value::i64(static_cast<int64_t>(h & 0x7fffffffffffffffULL));
  });
  r.addFn1("mineHash", [](Context& ctx, const Value& seed) {
    int64_t rounds = ctx.vars.count("rounds") ? ctx.var("rounds").asI64() : 1000;
    auto h = static_cast<uint64_t>(seed.asI64());
    for (int64_t i = 0; i < rounds; ++i) h = mix(h, static_cast<uint64_t>(i));
    return Value::i64(static_cast<int64_t>(h & 0xffff));
  });
}

}  // namespace ignis::executor
