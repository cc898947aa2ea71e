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

// Word count driver: prints "word<TAB>count" lines in word order.

#include <iostream>

#include "ignis/driver/api.hpp"
#include "ignis/error.hpp"

int main(int argc, char** argv) {
  using namespace ignis::driver;
  if (argc != 2) {
    std::cerr << "usage: wordcount INPUT\n";
    return 2;
  }
  try {
    Ignis::start();
    ICluster cluster;
    IWorker worker(cluster);
    auto counts = worker.textFile(argv[1])
                      .flatmap("words")
                      .map("lambda w: (w, 1)")
                      .reduceByKey("add")
                      .sortByKey()
                      .collect();
    for (const ignis::Value& row : counts) std::cout << row.first().asStr() << '\t' << row.second().asI64() << '\n';
    Ignis::stop();
  } catch (const ignis::Error& e) {
    std::cerr << "wordcount: " << ignis::errorCodeName(e.code()) << ": " << e.what() << '\n';
    Ignis::stop();
    return 1;
  }
  return 0;
}
