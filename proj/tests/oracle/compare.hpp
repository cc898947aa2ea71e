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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ignis/value.hpp"

namespace ignis::oracle {

/// Relative tolerance for F64 leaves.
inline constexpr double kF64Tolerance = 1e-9;

/// Structural equality with F64 leaves compared to a relative tolerance.
bool approxEqual(const Value& a, const Value& b, double rel = kF64Tolerance);
bool approxEqual(const std::vector<Value>& a, const std::vector<Value>& b, double rel = kF64Tolerance);
/// Multiset equality: both sides sorted by compareValues, then approxEqual.
bool sameMultiset(std::vector<Value> a, std::vector<Value> b, double rel = kF64Tolerance);
/// Sorts the inner List of every Pair(key, List) so grouped results compare.
std::vector<Value> normalizeGroups(std::vector<Value> groups);

std::string show(const std::vector<Value>& xs, size_t limit = 12);

/// Near-equal contiguous partitions, earlier ones take the remainder.
std::vector<std::vector<Value>> splitEven(const std::vector<Value>& xs, int64_t parts);

/// Reference SplitMix64 step.
uint64_t refSplitMix(uint64_t& state);
double refUniform(uint64_t& state);
uint64_t refPoisson(uint64_t& state, double mean);

}  // namespace ignis::oracle
