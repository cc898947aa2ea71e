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

#include "oracle/operator_suite.hpp"

#include <algorithm>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <stdexcept>

#include "ignis/driver/api.hpp"
#include "oracle/compare.hpp"

namespace ignis::oracle {
namespace {

namespace fs = std::filesystem;
using driver::ICluster;
using driver::IDataFrame;
using driver::Ignis;
using driver::IProperties;
using driver::ISource;
using driver::IWorker;

struct Mismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool less(const Value& a, const Value& b) { return compareValues(a, b) < 0; }

std::vector<Value> sortedCopy(std::vector<Value> xs) {
  std::sort(xs.begin(), xs.end(), less);
  return xs;
}

class Case {
 public:
  Case(uint64_t seed, IWorker& worker, int executors, std::string scratch, int index)
      : rng(seed), w(worker), p(executors), scratch(std::move(scratch)), index(index) {}

  int64_t uniform(int64_t lo, int64_t hi) { return std::uniform_int_distribution<int64_t>(lo, hi)(rng); }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  bool coin() { return uniform(0, 1) == 1; }
  int variant(int n) const { return index % n; }

  size_t size() { return uniform(0, 9) == 0 ? 0 : static_cast<size_t>(uniform(1, 64)); }
  int64_t parts() { return uniform(1, 8); }

  std::vector<Value> ints(int64_t lo = -1000, int64_t hi = 1000) {
    std::vector<Value> out;
    for (size_t i = 0, n = size(); i < n; ++i) out.push_back(Value::i64(uniform(lo, hi)));
    return out;
  }
  std::vector<Value> reals() {
    std::vector<Value> out;
    for (size_t i = 0, n = size(); i < n; ++i) out.push_back(Value::f64(real(-100, 100)));
    return out;
  }
  std::string word(int maxLen = 3) {
    std::string s;
    for (int64_t i = 0, n = uniform(0, maxLen); i < n; ++i) s += static_cast<char>('a' + uniform(0, 2));
    return s;
  }
  std::vector<Value> strs() {
    std::vector<Value> out;
    for (size_t i = 0, n = size(); i < n; ++i) out.push_back(Value::str(word()));
    return out;
  }
  std::vector<Value> sentences() {
    std::vector<Value> out;
    for (size_t i = 0, n = size(); i < n; ++i) {
      std::string s;
      for (int64_t k = 0, words = uniform(0, 4); k < words; ++k) s += std::string(static_cast<size_t>(uniform(0, 2)), ' ') + word(4);
      out.push_back(Value::str(s));
    }
    return out;
  }
  Value key(bool text) { return text ? Value::str(word(1)) : Value::i64(uniform(-4, 4)); }
  /// Pairs with a small key domain so keys repeat.
  std::vector<Value> pairs(bool textKeys, bool realValues) {
    std::vector<Value> out;
    for (size_t i = 0, n = size(); i < n; ++i) {
      out.push_back(Value::pair(key(textKeys), realValues ? Value::f64(real(-10, 10)) : Value::i64(uniform(-50, 50))));
    }
    return out;
  }
  std::vector<Value> anyScalars() {
    switch (uniform(0, 2)) {
      case 0: return ints();
      case 1: return reals();
      default: return strs();
    }
  }

  IDataFrame df(const std::vector<Value>& xs, int64_t n) const { return w.parallelize(xs, n); }
  IDataFrame df(const std::vector<Value>& xs) { return w.parallelize(xs, parts()); }

  std::string path(const std::string& kind) const {
    return (fs::path(scratch) / (kind + "-p" + std::to_string(p) + "-" + std::to_string(index))).string();
  }

  std::mt19937_64 rng;
  IWorker& w;
  int p;
  std::string scratch;
  int index;
};

void expectSeq(const std::vector<Value>& got, const std::vector<Value>& want, const std::string& what) {
  if (!approxEqual(got, want)) throw Mismatch(what + ": got " + show(got) + ", expected " + show(want));
}

void expectBag(const std::vector<Value>& got, const std::vector<Value>& want, const std::string& what) {
  if (!sameMultiset(got, want)) throw Mismatch(what + ": got " + show(got) + ", expected multiset " + show(want));
}

void expectValue(const Value& got, const Value& want, const std::string& what) {
  if (!approxEqual(got, want)) throw Mismatch(what + ": got " + got.toString() + ", expected " + want.toString());
}

void expectTrue(bool ok, const std::string& what) {
  if (!ok) throw Mismatch(what);
}

template <class F>
void expectError(ErrorCode code, F&& f, const std::string& what) {
  try {
    f();
  } catch (const Error& e) {
    if (e.code() == code) return;
    throw Mismatch(what + ": raised " + std::string(errorCodeName(e.code())) + " instead of " +
                   std::string(errorCodeName(code)));
  }
  throw Mismatch(what + ": no error raised");
}

template <class F>
std::vector<Value> mapAll(const std::vector<Value>& xs, F f) {
  std::vector<Value> out;
  for (const Value& x : xs) out.push_back(f(x));
  return out;
}

/// Pair(key, List[values]) per distinct key.
std::vector<Value> groupOracle(const std::vector<Value>& pairs) {
  std::map<Value, ValueList, bool (*)(const Value&, const Value&)> groups(less);
  for (const Value& kv : pairs) groups[kv.first()].push_back(kv.second());
  std::vector<Value> out;
  for (auto& [k, vs] : groups) out.push_back(Value::pair(k, Value::list(vs)));
  return normalizeGroups(out);
}

template <class F>
std::vector<Value> reduceByKeyOracle(const std::vector<Value>& pairs, F combine) {
  std::map<Value, Value, bool (*)(const Value&, const Value&)> acc(less);
  for (const Value& kv : pairs) {
    auto it = acc.find(kv.first());
    if (it == acc.end()) {
      acc.emplace(kv.first(), kv.second());
    } else {
      it->second = combine(it->second, kv.second());
    }
  }
  std::vector<Value> out;
  for (auto& [k, v] : acc) out.push_back(Value::pair(k, v));
  return out;
}

std::vector<Value> countOracle(const std::vector<Value>& keys) {
  std::map<Value, int64_t, bool (*)(const Value&, const Value&)> counts(less);
  for (const Value& k : keys) ++counts[k];
  std::vector<Value> out;
  for (auto& [k, c] : counts) out.push_back(Value::pair(k, Value::i64(c)));
  return out;
}

Value numAdd(const Value& a, const Value& b) {
  if (a.isI64() && b.isI64()) return Value::i64(a.asI64() + b.asI64());
  return Value::f64((a.isI64() ? static_cast<double>(a.asI64()) : a.asF64()) +
                    (b.isI64() ? static_cast<double>(b.asI64()) : b.asF64()));
}

std::vector<Value> partitionSizes(const IDataFrame& df) { return df.mapPartitions("lambda xs: [len xs]").collect(); }

std::vector<Value> sizesOf(const std::vector<std::vector<Value>>& parts) {
  std::vector<Value> out;
  for (const auto& part : parts) out.push_back(Value::i64(static_cast<int64_t>(part.size())));
  return out;
}

// Conversion.

void checkMap(Case& c) {
  switch (c.variant(5)) {
    case 0: {
      auto xs = c.ints();
      expectSeq(c.df(xs).map("lambda x: x * 3 + 1").collect(),
                mapAll(xs, [](const Value& x) { return Value::i64(x.asI64() * 3 + 1); }), "x * 3 + 1");
      break;
    }
    case 1: {
      auto xs = c.ints();
      int64_t k = c.uniform(-9, 9);
      ISource fn("lambda x: x - $k");
      fn.addParam("k", Value::i64(k));
      expectSeq(c.df(xs).map(fn).collect(), mapAll(xs, [k](const Value& x) { return Value::i64(x.asI64() - k); }),
                "x - $k");
      break;
    }
    case 2: {
      auto xs = c.reals();
      expectSeq(c.df(xs).map("lambda x: x * 0.5 + 1.25").collect(),
                mapAll(xs, [](const Value& x) { return Value::f64(x.asF64() * 0.5 + 1.25); }), "x * 0.5 + 1.25");
      break;
    }
    case 3: {
      auto xs = c.strs();
      expectSeq(c.df(xs).map("lambda s: s + \"!\"").collect(),
                mapAll(xs, [](const Value& x) { return Value::str(x.asStr() + "!"); }), "s + !");
      break;
    }
    default: {
      auto xs = c.ints();
      expectSeq(c.df(xs).map("lambda x: (x % 4, x)").collect(),
                mapAll(xs, [](const Value& x) { return Value::pair(Value::i64(x.asI64() % 4), x); }), "(x % 4, x)");
    }
  }
}

template <class P>
std::vector<Value> filterAll(const std::vector<Value>& xs, P pred) {
  std::vector<Value> out;
  for (const Value& x : xs) {
    if (pred(x)) out.push_back(x);
  }
  return out;
}

void checkFilter(Case& c) {
  switch (c.variant(4)) {
    case 0: {
      auto xs = c.ints();
      int64_t t = c.uniform(-1000, 1000);
      ISource fn("lambda x: x > $t");
      fn.addParam("t", Value::i64(t));
      expectSeq(c.df(xs).filter(fn).collect(), filterAll(xs, [t](const Value& x) { return x.asI64() > t; }), "x > $t");
      break;
    }
    case 1: {
      auto xs = c.ints();
      expectSeq(c.df(xs).filter("lambda x: x % 3 == 0").collect(),
                filterAll(xs, [](const Value& x) { return x.asI64() % 3 == 0; }), "x % 3 == 0");
      break;
    }
    case 2: {
      auto xs = c.strs();
      expectSeq(c.df(xs).filter("lambda s: len s < 2").collect(),
                filterAll(xs, [](const Value& x) { return x.asStr().size() < 2; }), "len s < 2");
      break;
    }
    default: {
      auto xs = c.reals();
      expectSeq(c.df(xs).filter("lambda x: x < 0.5").collect(),
                filterAll(xs, [](const Value& x) { return x.asF64() < 0.5; }), "x < 0.5");
    }
  }
}

void checkFlatmap(Case& c) {
  switch (c.variant(3)) {
    case 0: {
      auto xs = c.ints();
      std::vector<Value> want;
      for (const Value& x : xs) {
        if (x.asI64() > 0) {
          want.push_back(x);
          want.push_back(Value::i64(-x.asI64()));
        }
      }
      expectSeq(c.df(xs).flatmap("lambda x: if x > 0 then [x, 0 - x] else []").collect(), want, "conditional pair");
      break;
    }
    case 1: {
      auto xs = c.sentences();
      std::vector<Value> want;
      for (const Value& x : xs) {
        std::string w;
        for (char ch : x.asStr() + " ") {
          if (ch == ' ') {
            if (!w.empty()) want.push_back(Value::str(w));
            w.clear();
          } else {
            w += ch;
          }
        }
      }
      expectSeq(c.df(xs).flatmap("words").collect(), want, "words");
      break;
    }
    default: {
      auto xs = c.anyScalars();
      expectSeq(c.df(xs).flatmap("lambda x: [x]").collect(), xs, "singleton lists");
    }
  }
}

void checkKeyBy(Case& c) {
  if (c.variant(2) == 0) {
    auto xs = c.ints();
    expectSeq(c.df(xs).keyBy("lambda x: x % 7").collect(),
              mapAll(xs, [](const Value& x) { return Value::pair(Value::i64(x.asI64() % 7), x); }), "x % 7");
  } else {
    auto xs = c.strs();
    auto df = c.df(xs).keyBy("lambda s: len s");
    expectSeq(df.collect(), mapAll(xs, [](const Value& x) {
                return Value::pair(Value::i64(static_cast<int64_t>(x.asStr().size())), x);
              }),
              "len s");
    expectSeq(df.values().collect(), xs, "values after keyBy");
  }
}

void checkMapPartitions(Case& c) {
  auto xs = c.anyScalars();
  int64_t n = c.parts();
  auto parts = splitEven(xs, n);
  switch (c.variant(3)) {
    case 0: expectSeq(c.df(xs, n).mapPartitions("lambda xs: [len xs]").collect(), sizesOf(parts), "sizes"); break;
    case 1: {
      std::vector<Value> want;
      for (auto& part : parts) want.insert(want.end(), part.rbegin(), part.rend());
      auto df = c.df(xs, n).mapPartitions("reverse");
      expectSeq(df.collect(), want, "reverse");
      expectSeq(df.mapPartitions("reverse").collect(), xs, "reverse twice");
      break;
    }
    default: {
      std::vector<Value> want;
      for (auto& part : parts) {
        want.insert(want.end(), part.begin(), part.end());
        want.insert(want.end(), part.begin(), part.end());
      }
      expectSeq(c.df(xs, n).mapPartitions("lambda xs: xs + xs").collect(), want, "xs + xs");
    }
  }
}

void checkKeys(Case& c) {
  auto xs = c.pairs(c.coin(), c.coin());
  expectSeq(c.df(xs).keys().collect(), mapAll(xs, [](const Value& x) { return x.first(); }), "keys");
}

void checkValues(Case& c) {
  auto xs = c.pairs(c.coin(), c.coin());
  expectSeq(c.df(xs).values().collect(), mapAll(xs, [](const Value& x) { return x.second(); }), "values");
}

void checkMapValues(Case& c) {
  if (c.variant(2) == 0) {
    auto xs = c.pairs(c.coin(), false);
    expectSeq(c.df(xs).mapValues("lambda v: v * v").collect(), mapAll(xs, [](const Value& x) {
                return Value::pair(x.first(), Value::i64(x.second().asI64() * x.second().asI64()));
              }),
              "v * v");
  } else {
    auto xs = c.pairs(c.coin(), true);
    expectSeq(c.df(xs).mapValues("lambda v: v / 3.0").collect(), mapAll(xs, [](const Value& x) {
                return Value::pair(x.first(), Value::f64(x.second().asF64() / 3.0));
              }),
              "v / 3.0");
  }
}

// Grouping and sorting.

void checkGroupBy(Case& c) {
  if (c.variant(2) == 0) {
    auto xs = c.ints();
    auto keyed = mapAll(xs, [](const Value& x) { return Value::pair(Value::i64(x.asI64() % 5), x); });
    expectBag(normalizeGroups(c.df(xs).groupBy("lambda x: x % 5").collect()), groupOracle(keyed), "x % 5");
  } else {
    auto xs = c.strs();
    auto keyed = mapAll(xs, [](const Value& x) { return Value::pair(Value::i64(static_cast<int64_t>(x.asStr().size())), x); });
    expectBag(normalizeGroups(c.df(xs).groupBy("lambda s: len s", c.uniform(0, 6)).collect()), groupOracle(keyed),
              "len s");
  }
}

void checkGroupByKey(Case& c) {
  auto xs = c.pairs(c.coin(), c.coin());
  expectBag(normalizeGroups(c.df(xs).groupByKey(c.uniform(0, 6)).collect()), groupOracle(xs), "groupByKey");
}

void checkSort(Case& c) {
  auto xs = c.anyScalars();
  bool asc = c.coin();
  auto want = sortedCopy(xs);
  if (!asc) std::reverse(want.begin(), want.end());
  expectSeq(c.df(xs).sort(asc).collect(), want, asc ? "ascending" : "descending");
}

void expectSortedBy(const std::vector<Value>& got, const std::vector<Value>& input,
                    const std::function<Value(const Value&)>& key, bool asc, const std::string& what) {
  expectBag(got, input, what + " permutation");
  auto wantKeys = sortedCopy(mapAll(input, key));
  if (!asc) std::reverse(wantKeys.begin(), wantKeys.end());
  expectSeq(mapAll(got, key), wantKeys, what + " key order");
}

void checkSortBy(Case& c) {
  auto xs = c.ints();
  bool asc = c.coin();
  if (c.variant(2) == 0) {
    expectSortedBy(c.df(xs).sortBy("lambda x: 0 - x", asc).collect(), xs,
                   [](const Value& x) { return Value::i64(-x.asI64()); }, asc, "0 - x");
  } else {
    expectSortedBy(c.df(xs).sortBy("lambda x: x % 10", asc).collect(), xs,
                   [](const Value& x) { return Value::i64(x.asI64() % 10); }, asc, "x % 10");
  }
}

void checkSortByKey(Case& c) {
  auto xs = c.pairs(c.coin(), c.coin());
  bool asc = c.coin();
  expectSortedBy(c.df(xs).sortByKey(asc).collect(), xs, [](const Value& x) { return x.first(); }, asc, "sortByKey");
}

// Reductions.

void checkReduceLike(Case& c, bool tree) {
  auto run = [&](const IDataFrame& df, const ISource& fn) { return tree ? df.treeReduce(fn) : df.reduce(fn); };
  std::vector<Value> xs;
  std::function<Value(const Value&, const Value&)> f;
  ISource fn("add");
  switch (c.variant(4)) {
    case 0:
      xs = c.ints();
      f = numAdd;
      break;
    case 1:
      xs = c.reals();
      f = numAdd;
      break;
    case 2:
      xs = c.strs();
      fn = ISource("lambda a, b: a + b");
      f = [](const Value& a, const Value& b) { return Value::str(a.asStr() + b.asStr()); };
      break;
    default:
      xs = c.ints();
      fn = ISource("max");
      f = [](const Value& a, const Value& b) { return compareValues(b, a) > 0 ? b : a; };
  }
  IDataFrame df = c.df(xs);
  if (xs.empty()) {
    expectError(ErrorCode::kEmptyDataFrame, [&] { run(df, fn); }, "reduce of empty");
    return;
  }
  Value acc = xs[0];
  for (size_t i = 1; i < xs.size(); ++i) acc = f(acc, xs[i]);
  expectValue(run(df, fn), acc, "reduce");
}

void checkAggregateLike(Case& c, int mode) {
  // mode 0: aggregate, 1: treeAggregate, 2: fold.
  std::vector<Value> xs;
  Value zero = Value::i64(0);
  std::string seq = "add", comb = "add";
  std::function<Value(const Value&, const Value&)> f = numAdd;
  switch (c.variant(4)) {
    case 0:
      xs = c.ints();
      if (mode != 2) {
        seq = "lambda acc, x: acc + x * x";
        f = [](const Value& a, const Value& x) { return Value::i64(a.asI64() + x.asI64() * x.asI64()); };
      }
      break;
    case 1:
      xs = c.anyScalars();
      if (mode != 2) {
        seq = "lambda acc, x: acc + 1";
        f = [](const Value& a, const Value&) { return Value::i64(a.asI64() + 1); };
      } else {
        xs = c.ints();
      }
      break;
    case 2:
      xs = c.reals();
      zero = Value::f64(0.0);
      break;
    default:
      xs = c.strs();
      zero = Value::str("");
      seq = comb = "lambda a, b: a + b";
      f = [](const Value& a, const Value& b) { return Value::str(a.asStr() + b.asStr()); };
  }
  IDataFrame df = c.df(xs);
  Value acc = zero;
  for (const Value& x : xs) acc = f(acc, x);
  Value got;
  if (mode == 0) got = df.aggregate(zero, seq, comb);
  if (mode == 1) got = df.treeAggregate(zero, seq, comb);
  if (mode == 2) got = df.fold(zero, seq);
  expectValue(got, acc, mode == 2 ? "fold" : "aggregate");
}

void checkReduceByKey(Case& c) {
  switch (c.variant(3)) {
    case 0: {
      auto xs = c.pairs(c.coin(), false);
      expectBag(c.df(xs).reduceByKey("add", c.uniform(0, 6)).collect(), reduceByKeyOracle(xs, numAdd), "add");
      break;
    }
    case 1: {
      auto xs = c.pairs(c.coin(), true);
      expectBag(c.df(xs).reduceByKey("add").collect(), reduceByKeyOracle(xs, numAdd), "f64 add");
      break;
    }
    default: {
      auto xs = c.pairs(c.coin(), false);
      expectBag(c.df(xs).reduceByKey("lambda a, b: if a > b then a else b").collect(),
                reduceByKeyOracle(xs, [](const Value& a, const Value& b) { return a.asI64() > b.asI64() ? a : b; }),
                "max");
    }
  }
}

void checkAggregateByKey(Case& c) {
  auto xs = c.pairs(c.coin(), false);
  if (c.variant(2) == 0) {
    expectBag(c.df(xs).aggregateByKey(Value::i64(0), "lambda acc, v: acc + 1", "add").collect(),
              countOracle(mapAll(xs, [](const Value& x) { return x.first(); })), "per-key count");
  } else {
    std::map<Value, int64_t, bool (*)(const Value&, const Value&)> sums(less);
    for (const Value& kv : xs) sums[kv.first()] += kv.second().asI64() * kv.second().asI64();
    std::vector<Value> want;
    for (auto& [k, s] : sums) want.push_back(Value::pair(k, Value::i64(s)));
    expectBag(c.df(xs).aggregateByKey(Value::i64(0), "lambda acc, v: acc + v * v", "add", c.uniform(0, 6)).collect(),
              want, "per-key sum of squares");
  }
}

// Retrieval and output.

void checkCollect(Case& c) {
  auto xs = c.variant(2) == 0 ? c.anyScalars() : c.pairs(c.coin(), c.coin());
  expectSeq(c.df(xs).collect(), xs, "collect");
}

void checkTop(Case& c) {
  auto n = c.uniform(0, 12);
  if (c.variant(2) == 0) {
    auto xs = c.anyScalars();
    auto want = sortedCopy(xs);
    std::reverse(want.begin(), want.end());
    if (want.size() > static_cast<size_t>(n)) want.resize(static_cast<size_t>(n));
    expectSeq(c.df(xs).top(n), want, "top");
  } else {
    auto xs = c.ints();
    auto want = sortedCopy(xs);
    if (want.size() > static_cast<size_t>(n)) want.resize(static_cast<size_t>(n));
    expectSeq(c.df(xs).top(n, "lambda x: 0 - x"), want, "top by 0 - x");
  }
}

void checkTake(Case& c) {
  auto xs = c.anyScalars();
  auto n = c.uniform(0, static_cast<int64_t>(xs.size()) + 3);
  std::vector<Value> want(xs.begin(), xs.begin() + std::min<int64_t>(n, static_cast<int64_t>(xs.size())));
  expectSeq(c.df(xs).take(n), want, "take");
}

void checkSaveObject(Case& c) {
  auto xs = c.variant(2) == 0 ? c.anyScalars() : c.pairs(c.coin(), c.coin());
  std::string path = c.df(xs).saveAsObjectFile(c.path("obj"));
  expectSeq(c.w.partitionObjectFile(path).collect(), xs, "object file round trip");
  fs::remove_all(path);
}

void checkSaveText(Case& c) {
  auto xs = c.ints();
  int64_t n = c.parts();
  std::string path = c.df(xs, n).saveAsTextFile(c.path("text"));
  size_t files = 0;
  for (const auto& entry : fs::directory_iterator(path)) files += entry.is_regular_file() ? 1 : 0;
  expectTrue(files == static_cast<size_t>(n), "one text file per partition");
  expectSeq(c.w.textFile(path).collect(),
            mapAll(xs, [](const Value& x) { return Value::str(std::to_string(x.asI64())); }), "text round trip");
  fs::remove_all(path);
}

Value jsonImage(const Value& x) {
  if (x.isPair()) return Value::list({jsonImage(x.first()), jsonImage(x.second())});
  return x;
}

void checkSaveJson(Case& c) {
  auto xs = c.variant(2) == 0 ? c.anyScalars() : c.pairs(c.coin(), c.coin());
  std::string path = c.df(xs).saveAsJsonFile(c.path("json"));
  expectSeq(c.w.partitionJsonFile(path).collect(), mapAll(xs, jsonImage), "json round trip");
  fs::remove_all(path);
}

// Set operations.

void checkUnion(Case& c) {
  auto a = c.anyScalars();
  auto b = c.variant(3) == 0 ? std::vector<Value>{} : c.anyScalars();
  auto want = a;
  want.insert(want.end(), b.begin(), b.end());
  expectBag(c.df(a).unionDataFrame(c.df(b)).collect(), want, "union");
}

void checkJoin(Case& c) {
  bool text = c.coin();
  auto a = c.pairs(text, false);
  auto b = c.pairs(text, c.coin());
  std::vector<Value> want;
  for (const Value& x : a) {
    for (const Value& y : b) {
      if (x.first() == y.first()) want.push_back(Value::pair(x.first(), Value::pair(x.second(), y.second())));
    }
  }
  expectBag(c.df(a).join(c.df(b), c.uniform(0, 6)).collect(), want, "join");
}

void checkDistinct(Case& c) {
  auto xs = c.variant(2) == 0 ? c.ints(-10, 10) : c.strs();
  std::set<Value, bool (*)(const Value&, const Value&)> seen(less);
  for (const Value& x : xs) seen.insert(x);
  expectBag(c.df(xs).distinct(c.uniform(0, 6)).collect(), std::vector<Value>(seen.begin(), seen.end()), "distinct");
}

// Statistics.

std::vector<Value> sampleOracle(const std::vector<Value>& xs, int64_t n, bool withReplacement, int64_t seed,
                                const std::function<double(const Value&)>& fraction) {
  std::vector<Value> out;
  auto parts = splitEven(xs, n);
  for (size_t j = 0; j < parts.size(); ++j) {
    uint64_t state = static_cast<uint64_t>(seed) ^ static_cast<uint64_t>(j);
    for (const Value& x : parts[j]) {
      double f = fraction(x);
      uint64_t copies = withReplacement ? refPoisson(state, f) : (refUniform(state) < f ? 1 : 0);
      for (uint64_t k = 0; k < copies; ++k) out.push_back(x);
    }
  }
  return out;
}

void checkSample(Case& c) {
  auto xs = c.anyScalars();
  int64_t n = c.parts();
  bool rep = c.coin();
  double f = c.variant(5) == 0 ? 1.0 : c.real(0, rep ? 2.0 : 1.0);
  int64_t seed = c.uniform(0, 1 << 30);
  auto df = c.df(xs, n).sample(rep, f, seed);
  auto want = sampleOracle(xs, n, rep, seed, [f](const Value&) { return f; });
  expectSeq(df.collect(), want, "sample");
  if (!rep && f == 1.0) expectSeq(want, xs, "fraction 1 keeps everything");
}

void checkSampleByKey(Case& c) {
  auto xs = c.pairs(false, c.coin());
  int64_t n = c.parts();
  bool rep = c.coin();
  int64_t seed = c.uniform(0, 1 << 30);
  std::map<int64_t, double> fractions;
  ValueList wire;
  for (int64_t k = -4; k <= 4; ++k) {
    if (c.uniform(0, 3) == 0) continue;
    double f = c.real(0, rep ? 2.0 : 1.0);
    fractions[k] = f;
    wire.push_back(Value::pair(Value::i64(k), Value::f64(f)));
  }
  auto want = sampleOracle(xs, n, rep, seed, [&](const Value& x) {
    auto it = fractions.find(x.first().asI64());
    return it == fractions.end() ? 0.0 : it->second;
  });
  expectSeq(c.df(xs, n).sampleByKey(rep, Value::list(wire), seed).collect(), want, "sampleByKey");
}

void checkTakeSample(Case& c) {
  auto xs = c.anyScalars();
  bool rep = c.coin();
  int64_t n = c.uniform(0, static_cast<int64_t>(xs.size()) + 5);
  int64_t seed = c.uniform(0, 1 << 30);
  auto total = static_cast<uint64_t>(xs.size());
  std::vector<Value> want;
  uint64_t state = static_cast<uint64_t>(seed);
  if (total > 0 && rep) {
    for (int64_t i = 0; i < n; ++i) want.push_back(xs[refSplitMix(state) % total]);
  } else if (total > 0) {
    std::vector<size_t> order(total);
    for (size_t i = 0; i < total; ++i) order[i] = i;
    for (uint64_t i = 0; i < std::min<uint64_t>(static_cast<uint64_t>(n), total); ++i) {
      uint64_t j = i + refSplitMix(state) % (total - i);
      std::swap(order[i], order[j]);
      want.push_back(xs[order[i]]);
    }
  }
  expectSeq(c.df(xs).takeSample(rep, n, seed), want, "takeSample");
}

void checkCount(Case& c) {
  auto xs = c.anyScalars();
  expectValue(Value::i64(c.df(xs).count()), Value::i64(static_cast<int64_t>(xs.size())), "count");
}

void checkExtreme(Case& c, bool max) {
  auto pick = [max](const std::vector<Value>& xs, const std::function<Value(const Value&)>& key) {
    Value best = xs[0];
    for (const Value& x : xs) {
      auto cmp = compareValues(key(x), key(best));
      if (max ? cmp > 0 : cmp < 0) best = x;
    }
    return best;
  };
  if (c.variant(2) == 0) {
    auto xs = c.anyScalars();
    auto df = c.df(xs);
    if (xs.empty()) {
      expectError(ErrorCode::kEmptyDataFrame, [&] { max ? df.max() : df.min(); }, "extreme of empty");
      return;
    }
    expectValue(max ? df.max() : df.min(), pick(xs, [](const Value& x) { return x; }), max ? "max" : "min");
  } else {
    auto xs = c.ints();
    auto df = c.df(xs);
    auto key = [](const Value& x) { return Value::i64(x.asI64() % 10); };
    if (xs.empty()) {
      expectError(ErrorCode::kEmptyDataFrame, [&] { max ? df.max("lambda x: x % 10") : df.min("lambda x: x % 10"); },
                  "extreme of empty");
      return;
    }
    Value got = max ? df.max("lambda x: x % 10") : df.min("lambda x: x % 10");
    expectValue(key(got), key(pick(xs, key)), "extreme key");
    expectTrue(std::find(xs.begin(), xs.end(), got) != xs.end(), "extreme is an input element");
  }
}

void checkCountByKey(Case& c) {
  auto xs = c.pairs(c.coin(), c.coin());
  expectBag(c.df(xs).countByKey().collect(), countOracle(mapAll(xs, [](const Value& x) { return x.first(); })),
            "countByKey");
}

void checkCountByValue(Case& c) {
  auto xs = c.variant(2) == 0 ? c.ints(-10, 10) : c.strs();
  expectBag(c.df(xs).countByValue().collect(), countOracle(xs), "countByValue");
}

// Partitioning.

void checkRepartition(Case& c) {
  auto xs = c.anyScalars();
  int64_t n = c.uniform(1, 10);
  auto df = c.df(xs).repartition(n);
  expectSeq(df.collect(), xs, "order");
  expectSeq(partitionSizes(df), sizesOf(splitEven(xs, n)), "partition sizes");
}

void checkPartitionBy(Case& c) {
  int64_t n = c.uniform(1, 8);
  std::vector<Value> xs;
  std::function<Value(const Value&)> key;
  IDataFrame df = c.w.parallelize({});
  if (c.variant(2) == 0) {
    xs = c.pairs(c.coin(), c.coin());
    key = [](const Value& x) { return x.first(); };
    df = c.df(xs).partitionBy(n);
  } else {
    xs = c.ints();
    key = [](const Value& x) { return Value::i64(x.asI64() % 3); };
    df = c.df(xs).partitionBy(n, "lambda x: x % 3");
  }
  std::vector<std::vector<Value>> buckets(static_cast<size_t>(n));
  for (const Value& x : xs) buckets[hashValue(key(x)) % static_cast<uint64_t>(n)].push_back(x);
  std::vector<Value> want;
  for (auto& b : buckets) want.insert(want.end(), b.begin(), b.end());
  expectSeq(df.collect(), want, "partition contents");
  expectSeq(partitionSizes(df), sizesOf(buckets), "partition sizes");
}

// Persistence.

storage::StoreKind randomTier(Case& c) {
  switch (c.uniform(0, 2)) {
    case 0: return storage::StoreKind::inMemory();
    case 1: return storage::StoreKind::rawMemory(static_cast<int>(c.uniform(0, 9)));
    default: return storage::StoreKind::disk("", static_cast<int>(c.uniform(0, 9)));
  }
}

void checkPersistence(Case& c, const std::string& verb) {
  auto xs = c.ints();
  auto want = mapAll(xs, [](const Value& x) { return Value::i64(x.asI64() * 2); });
  IDataFrame df = c.df(xs).map("lambda x: x * 2");
  auto& backend = Ignis::backend();
  if (verb == "cache") {
    df.cache();
  } else {
    df.persist(randomTier(c));
  }
  expectSeq(df.collect(), want, verb + " first action");
  expectValue(Value::i64(df.count()), Value::i64(static_cast<int64_t>(xs.size())), verb + " second action");
  expectSeq(df.filter("lambda x: x > 0").collect(), filterAll(want, [](const Value& x) { return x.asI64() > 0; }),
            verb + " downstream");
  expectTrue(backend.execCount(df.id()) == 1, verb + ": cached transform ran " + std::to_string(backend.execCount(df.id())) + " times");
  if (verb == "unpersist") df.unpersist();
  if (verb == "uncache") df.uncache();
  if (verb == "unpersist" || verb == "uncache") {
    expectSeq(df.collect(), want, verb + " after release");
    expectSeq(df.collect(), want, verb + " after release, again");
    expectTrue(backend.execCount(df.id()) == 3, verb + ": released transform ran " + std::to_string(backend.execCount(df.id())) + " times");
  } else {
    df.unpersist();
  }
}

using Check = std::function<void(Case&)>;

const std::vector<std::pair<std::string, Check>>& checks() {
  static const std::vector<std::pair<std::string, Check>> kChecks = {
      {"map", checkMap},
      {"filter", checkFilter},
      {"flatmap", checkFlatmap},
      {"keyBy", checkKeyBy},
      {"mapPartitions", checkMapPartitions},
      {"keys", checkKeys},
      {"values", checkValues},
      {"mapValues", checkMapValues},
      {"groupBy", checkGroupBy},
      {"groupByKey", checkGroupByKey},
      {"sort", checkSort},
      {"sortBy", checkSortBy},
      {"sortByKey", checkSortByKey},
      {"reduce", [](Case& c) { checkReduceLike(c, false); }},
      {"treeReduce", [](Case& c) { checkReduceLike(c, true); }},
      {"aggregate", [](Case& c) { checkAggregateLike(c, 0); }},
      {"treeAggregate", [](Case& c) { checkAggregateLike(c, 1); }},
      {"fold", [](Case& c) { checkAggregateLike(c, 2); }},
      {"reduceByKey", checkReduceByKey},
      {"aggregateByKey", checkAggregateByKey},
      {"collect", checkCollect},
      {"top", checkTop},
      {"take", checkTake},
      {"saveAsObjectFile", checkSaveObject},
      {"saveAsTextFile", checkSaveText},
      {"saveAsJsonFile", checkSaveJson},
      {"union", checkUnion},
      {"join", checkJoin},
      {"distinct", checkDistinct},
      {"sample", checkSample},
      {"sampleByKey", checkSampleByKey},
      {"takeSample", checkTakeSample},
      {"count", checkCount},
      {"max", [](Case& c) { checkExtreme(c, true); }},
      {"min", [](Case& c) { checkExtreme(c, false); }},
      {"countByKey", checkCountByKey},
      {"countByValue", checkCountByValue},
      {"repartition", checkRepartition},
      {"partitionBy", checkPartitionBy},
      {"persist", [](Case& c) { checkPersistence(c, "persist"); }},
      {"cache", [](Case& c) { checkPersistence(c, "cache"); }},
      {"unpersist", [](Case& c) { checkPersistence(c, "unpersist"); }},
      {"uncache", [](Case& c) { checkPersistence(c, "uncache"); }},
  };
  return kChecks;
}

uint64_t caseSeed(uint64_t seed, const std::string& op, int p, int index) {
  uint64_t h = seed ^ (static_cast<uint64_t>(p) << 32) ^ static_cast<uint64_t>(index);
  for (char ch : op) h = (h ^ static_cast<unsigned char>(ch)) * 0x100000001b3ULL;
  return h;
}

}  // namespace

const std::vector<std::string>& operatorNames() {
  static const std::vector<std::string> kNames = [] {
    std::vector<std::string> out;
    for (const auto& [name, check] : checks()) out.push_back(name);
    return out;
  }();
  return kNames;
}

std::vector<OperatorOutcome> runOperatorSuite(const OperatorSuiteOptions& options) {
  std::vector<OperatorOutcome> outcomes;
  fs::create_directories(options.scratch);
  for (int p : options.executors) {
    IProperties props;
    props.set(props::kExecutorInstances, std::to_string(p));
    props.set(props::kPartitionDiskDir, (fs::path(options.scratch) / "disk").string());
    Ignis::start(props);
    try {
      ICluster cluster;
      IWorker worker(cluster);
      for (const auto& [name, check] : checks()) {
        if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), name) == options.only.end()) {
          continue;
        }
        OperatorOutcome out;
        out.op = name;
        out.executors = p;
        for (int i = 0; i < options.casesPerOp; ++i) {
          Case c(caseSeed(options.seed, name, p, i), worker, p, options.scratch, i);
          ++out.cases;
          std::string failure;
          try {
            check(c);
          } catch (const Mismatch& m) {
            failure = m.what();
          } catch (const Error& e) {
            failure = std::string(errorCodeName(e.code())) + ": " + e.what();
          }
          if (!failure.empty()) {
            if (out.failures++ == 0) out.firstFailure = "case " + std::to_string(i) + ": " + failure;
          }
        }
        outcomes.push_back(std::move(out));
      }
    } catch (...) {
      Ignis::stop();
      throw;
    }
    Ignis::stop();
  }
  fs::remove_all(options.scratch);
  return outcomes;
}

}  // namespace ignis::oracle
