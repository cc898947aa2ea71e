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


#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include "ignis/executor/ops.hpp"

namespace ignis::executor {

uint64_t Dataset::size() const {
  uint64_t n = 0;
  for (const PartRef& p : parts) n += p->size();
  return n;
}

std::vector<Value> Dataset::values() const {
  std::vector<Value> out;
  out.reserve(size());
  for (const PartRef& p : parts) p->forEach([&](const Value& v) { out.push_back(v); });
  return out;
}

PartRef TaskEnv::newPartition(size_t localIndex) const {
  std::string name;
  if (persistFiles && store.tier == storage::StoreKind::Tier::kDisk) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "part-%05zu.ignp", localIndex);
    name = buf;
  }
  auto p = std::make_shared<storage::Partition>(storage::Partition::create(store, name));
  return p;
}

uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform01(uint64_t& state) { return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53; }

uint64_t poisson(uint64_t& state, double mean) {
  if (mean <= 0) return 0;
  double limit = std::exp(-mean);
  double prod = uniform01(state);
  uint64_t k = 0;
  while (prod > limit) {
    ++k;
    prod *= uniform01(state);
  }
  return k;
}

int64_t blockStart(int e, int64_t n, int p) { return static_cast<int64_t>(e) * n / p; }

int blockOwner(int64_t j, int64_t n, int p) { return static_cast<int>(((j + 1) * p + n - 1) / n - 1); }

int64_t evenPartitionSize(int64_t j, int64_t total, int64_t n) { return total / n + (j < total % n ? 1 : 0); }

int64_t evenPartitionOf(int64_t g, int64_t total, int64_t n) {
  int64_t base = total / n;
  int64_t rem = total % n;
  int64_t head = rem * (base + 1);
  if (g < head) return g / (base + 1);
  return rem + (g - head) / base;
}

GlobalOffset globalOffset(comms::Communicator* comm, int64_t local) {
  GlobalOffset out;
  if (!comm || comm->size() == 1) {
    out.perRank = {local};
    out.total = local;
    return out;
  }
  Value all = comm->allreduce(Value::list({Value::i64(local)}), [](const Value& a, const Value& b) {
    ValueList items = a.asList();
    items.insert(items.end(), b.asList().begin(), b.asList().end());
    return Value::list(std::move(items));
  });
  for (const Value& v : all.asList()) out.perRank.push_back(v.asI64());
  for (int r = 0; r < comm->size(); ++r) {
    if (r < comm->rank()) out.offset += out.perRank[r];
    out.total += out.perRank[r];
  }
  return out;
}

void parallelFor(size_t n, int threads, const std::function<void(size_t, int)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i, 0);
    return;
  }
  std::mutex mu;
  size_t next = 0;
  size_t failedAt = n;
  std::exception_ptr failure;
  auto worker = [&](int t) {
    while (true) {
      size_t i;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next >= n || failure) return;
        i = next++;
      }
      try {
        fn(i, t);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (i < failedAt) {
          failedAt = i;
          failure = std::current_exception();
        }
      }
    }
  };
  int count = static_cast<int>(std::min<size_t>(n, static_cast<size_t>(threads)));
  std::vector<std::thread> pool;
  for (int t = 1; t < count; ++t) pool.emplace_back(worker, t);
  worker(0);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

void rethrowUserError(const std::string& op, const UserFn& fn, int rank, size_t part, size_t index) {
  std::string name = fn.describe().empty() ? "" : " (" + fn.describe() + ")";
  std::string where = " in " + op + name + " at executor " + std::to_string(rank) + " partition " +
                      std::to_string(part) + " element " + std::to_string(index);
  try {
    throw;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kPeerLost || e.code() == ErrorCode::kStaleEpoch) throw;
    throw Error(e.code(), std::string(e.what()) + where, rank);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kUserFunction, std::string(e.what()) + where, rank);
  } catch (...) {
    throw Error(ErrorCode::kUserFunction, "unknown exception" + where, rank);
  }
}

}  // namespace ignis::executor
