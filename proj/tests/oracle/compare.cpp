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

#include "oracle/compare.hpp"

#include <algorithm>
#include <cmath>

namespace ignis::oracle {

bool approxEqual(const Value& a, const Value& b, double rel) {
  if (a.isF64() && b.isF64()) {
    double x = a.asF64(), y = b.asF64();
    if (x == y) return true;
    return std::fabs(x - y) <= rel * std::max(std::fabs(x), std::fabs(y));
  }
  if (a.tag() != b.tag()) return false;
  if (a.isPair()) return approxEqual(a.first(), b.first(), rel) && approxEqual(a.second(), b.second(), rel);
  if (a.isList()) return approxEqual(a.asList(), b.asList(), rel);
  return a == b;
}

bool approxEqual(const std::vector<Value>& a, const std::vector<Value>& b, double rel) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (!approxEqual(a[i], b[i], rel)) return false;
  }
  return true;
}

bool sameMultiset(std::vector<Value> a, std::vector<Value> b, double rel) {
  auto less = [](const Value& x, const Value& y) { return compareValues(x, y) < 0; };
  std::sort(a.begin(), a.end(), less);
  std::sort(b.begin(), b.end(), less);
  return approxEqual(a, b, rel);
}

std::vector<Value> normalizeGroups(std::vector<Value> groups) {
  for (Value& g : groups) {
    ValueList items = g.second().asList();
    std::sort(items.begin(), items.end(), [](const Value& x, const Value& y) { return compareValues(x, y) < 0; });
    g = Value::pair(g.first(), Value::list(std::move(items)));
  }
  return groups;
}

std::string show(const std::vector<Value>& xs, size_t limit) {
  std::string out = "[";
  for (size_t i = 0; i < xs.size() && i < limit; ++i) {
    if (i) out += ", ";
    out += xs[i].toString();
  }
  if (xs.size() > limit) out += ", ... (" + std::to_string(xs.size()) + " total)";
  return out + "]";
}

std::vector<std::vector<Value>> splitEven(const std::vector<Value>& xs, int64_t parts) {
  std::vector<std::vector<Value>> out(static_cast<size_t>(parts));
  auto total = static_cast<int64_t>(xs.size());
  int64_t pos = 0;
  for (int64_t j = 0; j < parts; ++j) {
    int64_t size = total / parts + (j < total % parts ? 1 : 0);
    out[static_cast<size_t>(j)].assign(xs.begin() + pos, xs.begin() + pos + size);
    pos += size;
  }
  return out;
}

uint64_t refSplitMix(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double refUniform(uint64_t& state) { return std::ldexp(static_cast<double>(refSplitMix(state) >> 11), -53); }

uint64_t refPoisson(uint64_t& state, double mean) {
  if (mean <= 0) return 0;
  // Knuth's multiplication method.
  double threshold = std::exp(-mean);
  uint64_t k = 0;
  double product = refUniform(state);
  for (; product > threshold; ++k) product *= refUniform(state);
  return k;
}

}  // namespace ignis::oracle
