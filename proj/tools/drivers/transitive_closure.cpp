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

// Transitive closure driver: parses edges on one worker, imports them into a
// second worker and joins paths until no new pair appears. Prints the closure
// size, then one "src dst" line per pair.

#include <iostream>

#include "ignis/driver/api.hpp"
#include "ignis/error.hpp"

int main(int argc, char** argv) {
  using namespace ignis::driver;
  if (argc != 2) {
    std::cerr << "usage: transitive-closure EDGES\n";
    return 2;
  }
  try {
    Ignis::start();
    ICluster cluster;
    IWorker parser(cluster, "workloads");
    IDataFrame parsed = parser.textFile(argv[1]).map("parseEdge");

    IWorker closer(cluster, "workloads");
    IDataFrame edges = closer.importData(parsed);
    edges.cache();
    IDataFrame reversed = edges.map("lambda e: (snd e, fst e)");
    reversed.cache();
    IDataFrame tc = edges;
    int64_t oldCount = 0;
    int64_t nextCount = tc.count();
    while (nextCount != oldCount) {
      oldCount = nextCount;
      IDataFrame next = tc.unionDataFrame(tc.join(reversed).map("lambda r: (snd snd r, fst snd r)")).distinct();
      next.cache();
      nextCount = next.count();
      tc = next;
    }
    std::cout << nextCount << '\n';
    for (const ignis::Value& e : tc.sort().collect()) std::cout << e.first().asI64() << ' ' << e.second().asI64() << '\n';
    Ignis::stop();
  } catch (const ignis::Error& e) {
    std::cerr << "transitive-closure: " << ignis::errorCodeName(e.code()) << ": " << e.what() << '\n';
    Ignis::stop();
    return 1;
  }
  return 0;
}
