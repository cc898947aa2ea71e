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

#include "ignis/workloads/workloads.hpp"

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "ignis/driver/api.hpp"
#include "ignis/error.hpp"
#include "ignis/executor/ops.hpp"
#include "ignis/properties.hpp"

namespace ignis::workloads {

namespace fs = std::filesystem;
using driver::ICluster;
using driver::IDataFrame;
using driver::Ignis;
using driver::IProperties;
using driver::ISource;
using driver::IWorker;

namespace {

class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}
  uint64_t next() { return executor::splitmix64(state_); }
  uint64_t below(uint64_t n) { return next() % n; }
  double uniform() { return executor::uniform01(state_); }

 private:
  uint64_t state_;
};

std::ofstream openOut(const std::string& path) {
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path);
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  if (!out.flush()) fail(ErrorCode::kIo, "cannot write " + path);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double num(const Value& v) { return v.isI64() ? static_cast<double>(v.asI64()) : v.asF64(); }

class Run {
 public:
  Run(const WorkloadSpec& spec, int executors) : spec_(spec), executors_(executors) {
    if (executors < 1) fail(ErrorCode::kUsage, "executors must be positive");
    if (spec.workDir.empty()) fail(ErrorCode::kUsage, "workDir is required");
    fs::create_directories(spec.workDir);
    IProperties props;
    props.set(props::kExecutorInstances, std::to_string(executors));
    cluster_.emplace(props);
    execBefore_ = Ignis::backend().taskExecutions();
    start_ = std::chrono::steady_clock::now();
  }

  IWorker& worker() {
    workers_.emplace_back(*cluster_, "workloads");
    return workers_.back();
  }

  int64_t partitions() const { return spec_.partitions > 0 ? spec_.partitions : 2 * executors_; }
  std::string path(const std::string& name) const { return (fs::path(spec_.workDir) / name).string(); }

  WorkloadResult finish(WorkloadResult r) {
    auto end = std::chrono::steady_clock::now();
    r.name = spec_.name;
    r.executors = executors_;
    r.metrics.seconds = std::chrono::duration<double>(end - start_).count();
    r.metrics.taskExecutions = Ignis::backend().taskExecutions() - execBefore_;
    for (const IWorker& w : workers_) {
      executor::Args m = executor::Args::fromValue(Ignis::backend().metrics(w.id()));
      r.metrics.stages += m.i64Or("stages", 0);
      r.metrics.partitionPasses += m.i64Or("partitionPasses", 0);
      r.metrics.exchangeMessages += m.i64Or("exchangeMessages", 0);
      r.metrics.exchangeBytes += m.i64Or("exchangeBytes", 0);
      r.metrics.dataFrames += m.i64Or("dataFrames", 0);
      r.metrics.dataBytes += m.i64Or("dataBytes", 0);
    }
    for (const IWorker& w : workers_) w.stop();
    workers_.clear();
    return r;
  }

  ~Run() {
    for (const IWorker& w : workers_) {
      try {
        w.stop();
      } catch (const Error&) {
      }
    }
  }

 private:
  const WorkloadSpec& spec_;
  int executors_;
  std::optional<ICluster> cluster_;
  std::deque<IWorker> workers_;
  int64_t execBefore_ = 0;
  std::chrono::steady_clock::time_point start_;
};

std::vector<Value> sorted(std::vector<Value> rows) {
  std::sort(rows.begin(), rows.end(), [](const Value& a, const Value& b) { return compareValues(a, b) < 0; });
  return rows;
}

WorkloadResult wordcount(const WorkloadSpec& spec, int p) {
  Run run(spec, p);
  WorkloadResult r;
  r.inputPath = run.path("wordcount-input.txt");
  generateText(r.inputPath, spec.seed, spec.size > 0 ? spec.size : 10000);
  IWorker& w = run.worker();
  IDataFrame words = w.textFile(r.inputPath, run.partitions()).flatmap("words");
  if (spec.hybrid) {
    r.rows = w.call("wordcountMerge", words).collect();
  } else {
    r.rows = words.map("lambda w: (w, 1)").reduceByKey("add").collect();
  }
  r.rows = sorted(std::move(r.rows));
  return run.finish(std::move(r));
}

WorkloadResult terasort(const WorkloadSpec& spec, int p) {
  Run run(spec, p);
  WorkloadResult r;
  r.inputPath = run.path("terasort-input.txt");
  r.outputPath = run.path("terasort-output");
  generateSortRecords(r.inputPath, spec.seed, spec.size > 0 ? spec.size : 100000);
  fs::remove_all(r.outputPath);
  IWorker& w = run.worker();
  IDataFrame sortedRecords = w.textFile(r.inputPath, run.partitions())
                                 .map("teraSplit")
                                 .repartition(run.partitions())
                                 .sort();
  IDataFrame lines = sortedRecords.map("lambda r: snd r");
  lines.saveAsTextFile(r.outputPath);
  r.loadPerExecutor = Ignis::backend().elementsPerExecutor(lines.id());
  return run.finish(std::move(r));
}

std::vector<Value> initialCentroids(const std::string& path, int64_t k) {
  std::ifstream in(path);
  std::vector<Value> out;
  std::string line;
  while (static_cast<int64_t>(out.size()) < k && std::getline(in, line)) {
    ValueList point;
    std::istringstream fields(line);
    double v = 0;
    while (fields >> v) point.push_back(Value::f64(v));
    out.push_back(Value::list(std::move(point)));
  }
  if (static_cast<int64_t>(out.size()) < k) fail(ErrorCode::kPrecondition, "kmeans: fewer points than clusters");
  return out;
}

WorkloadResult kmeans(const WorkloadSpec& spec, int p) {
  Run run(spec, p);
  WorkloadResult r;
  r.inputPath = run.path("kmeans-input.txt");
  r.outputPath = run.path("kmeans-output");
  generatePoints(r.inputPath, spec.seed, spec.size > 0 ? spec.size : 2000, spec.k, spec.dim);
  fs::remove_all(r.outputPath);
  std::vector<Value> centroids = initialCentroids(r.inputPath, spec.k);
  IWorker& w = run.worker();
  IDataFrame points = w.textFile(r.inputPath, run.partitions()).map("parseVector");
  points.cache();
  if (spec.resident) {
    IDataFrame done = points.iterate("kmeansStep", Value::list(centroids), spec.iterations);
    driver::IterationResult it = done.iterationResult();
    centroids = it.state.asList();
    r.iterations = it.iterations;
    r.pids = std::move(it.pids);
  } else {
    for (int64_t i = 0; i < spec.iterations; ++i) {
      std::vector<Value> sums = points.map(ISource("kmeansAssign").addParam("centroids", Value::list(centroids)))
                                    .reduceByKey("kmeansMerge")
                                    .collect();
      for (const Value& row : sums) {
        auto c = static_cast<size_t>(row.first().asI64());
        const ValueList& total = row.second().first().asList();
        auto n = static_cast<double>(row.second().second().asI64());
        ValueList next;
        for (const Value& x : total) next.push_back(Value::f64(num(x) / n));
        centroids[c] = Value::list(std::move(next));
      }
      ++r.iterations;
    }
  }
  points.map(ISource("kmeansAssign").addParam("centroids", Value::list(centroids)))
      .map("lambda a: (fst a, fst snd a)")
      .saveAsTextFile(r.outputPath);
  r.rows = std::move(centroids);
  return run.finish(std::move(r));
}

WorkloadResult pagerank(const WorkloadSpec& spec, int p) {
  Run run(spec, p);
  WorkloadResult r;
  int64_t vertices = spec.size > 0 ? spec.size : 100;
  r.inputPath = run.path("pagerank-input.txt");
  generateGraph(r.inputPath, spec.seed, vertices, spec.edges > 0 ? spec.edges : 5 * vertices, true);
  const double damping = 0.85;
  IWorker& w = run.worker();
  IDataFrame links = w.textFile(r.inputPath, run.partitions())
                         .map("parseEdge")
                         .mapValues("lambda d: [d]")
                         .reduceByKey("concat")
                         .repartition(run.partitions());
  links.cache();
  int64_t n = links.count();
  IDataFrame ranks = links.mapValues(ISource("lambda l: 1.0 / $n").addParam("n", Value::f64(static_cast<double>(n))));
  ISource update = ISource("lambda s: $base + $d * s")
                       .addParam("base", Value::f64((1.0 - damping) / static_cast<double>(n)))
                       .addParam("d", Value::f64(damping));
  for (int64_t i = 0; i < spec.iterations; ++i) {
    ranks = links.join(ranks)
                .flatmap("pagerankContribs")
                .mapValues("lambda x: [x]")
                .reduceByKey("concat")
                .mapValues("sortedSum")
                .mapValues(update);
    ++r.iterations;
  }
  r.rows = sorted(ranks.collect());
  return run.finish(std::move(r));
}

WorkloadResult transitiveClosure(const WorkloadSpec& spec, int p) {
  Run run(spec, p);
  WorkloadResult r;
  int64_t vertices = spec.size > 0 ? spec.size : 75;
  int64_t edgeCount = spec.edges > 0 ? spec.edges : (spec.size > 0 ? vertices * 8 / 3 : 200);
  r.inputPath = run.path("tc-input.txt");
  generateGraph(r.inputPath, spec.seed, vertices, edgeCount, false);
  IWorker& w = run.worker();
  IDataFrame edges = w.textFile(r.inputPath, run.partitions()).map("parseEdge");
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
    if (tc.id() != edges.id()) tc.uncache();
    tc = next;
    ++r.iterations;
  }
  r.rows = sorted(tc.collect());
  return run.finish(std::move(r));
}

WorkloadResult minebench(const WorkloadSpec& spec, int p) {
  Run run(spec, p);
  WorkloadResult r;
  r.inputPath = run.path("minebench-input.txt");
  r.outputPath = run.path("minebench-output");
  generateBlocks(r.inputPath, spec.seed, spec.size > 0 ? spec.size : 10000);
  fs::remove_all(r.outputPath);
  IWorker& parser = run.worker();
  IWorker& hasher = run.worker();
  IDataFrame roots = parser.textFile(r.inputPath, run.partitions()).map("mineParse");
  hasher.importData(roots)
      .map(ISource("mineHash").addParam("rounds", Value::i64(spec.rounds)))
      .saveAsTextFile(r.outputPath);
  return run.finish(std::move(r));
}

}  // namespace

const std::vector<std::string>& workloadNames() {
  static const std::vector<std::string> names{"wordcount", "terasort",          "kmeans",
                                              "pagerank",  "transitiveClosure", "minebench-sim"};
  return names;
}

WorkloadResult runWorkload(const WorkloadSpec& spec, int executors) {
  if (spec.name == "wordcount") return wordcount(spec, executors);
  if (spec.name == "terasort") return terasort(spec, executors);
  if (spec.name == "kmeans") return kmeans(spec, executors);
  if (spec.name == "pagerank") return pagerank(spec, executors);
  if (spec.name == "transitiveClosure") return transitiveClosure(spec, executors);
  if (spec.name == "minebench-sim") return minebench(spec, executors);
  fail(ErrorCode::kUsage, "unknown workload '" + spec.name + "'");
}

void generateText(const std::string& path, uint64_t seed, int64_t lines) {
  static const char* const kSyllables[] = {"ka", "lo", "mi", "ne", "ru", "sa", "to", "vi", "ze", "qu", "an", "el"};
  const int64_t vocabulary = 2000;
  Rng rng(seed);
  std::ofstream out = openOut(path);
  for (int64_t i = 0; i < lines; ++i) {
    int64_t words = 1 + static_cast<int64_t>(rng.below(12));
    for (int64_t j = 0; j < words; ++j) {
      double u = rng.uniform();
      auto id = static_cast<int64_t>(static_cast<double>(vocabulary) * u * u * u);
      std::string word;
      for (int64_t x = id + 1; x > 0; x /= 12) word += kSyllables[x % 12];
      out << (j ? " " : "") << word;
    }
    out << '\n';
  }
  finish(out, path);
}

void generateSortRecords(const std::string& path, uint64_t seed, int64_t lines) {
  Rng rng(seed);
  std::ofstream out = openOut(path);
  char row[24];
  for (int64_t i = 0; i < lines; ++i) {
    std::string line;
    for (int c = 0; c < 10; ++c) line += static_cast<char>('!' + rng.below(94));
    std::snprintf(row, sizeof row, " %010" PRId64 " ", i);
    line += row;
    for (int c = 0; c < 20; ++c) line += "0123456789ABCDEF"[rng.below(16)];
    out << line << '\n';
  }
  finish(out, path);
}

void generatePoints(const std::string& path, uint64_t seed, int64_t points, int64_t k, int64_t dim) {
  if (k < 1 || dim < 1) fail(ErrorCode::kUsage, "k and dim must be positive");
  Rng rng(seed);
  std::vector<std::vector<double>> centers(static_cast<size_t>(k), std::vector<double>(static_cast<size_t>(dim)));
  for (auto& c : centers)
    for (double& x : c) x = -10.0 + 20.0 * rng.uniform();
  std::ofstream out = openOut(path);
  for (int64_t i = 0; i < points; ++i) {
    const auto& c = centers[rng.below(static_cast<uint64_t>(k))];
    for (int64_t d = 0; d < dim; ++d) {
      double noise = rng.uniform() + rng.uniform() + rng.uniform() - 1.5;
      out << (d ? " " : "") << fmt(c[static_cast<size_t>(d)] + noise);
    }
    out << '\n';
  }
  finish(out, path);
}

void generateGraph(const std::string& path, uint64_t seed, int64_t vertices, int64_t edges,
                   bool everyVertexHasOutEdge) {
  if (vertices < 2) fail(ErrorCode::kUsage, "a graph needs at least two vertices");
  if (edges > vertices * (vertices - 1)) fail(ErrorCode::kUsage, "too many edges for the vertex count");
  if (everyVertexHasOutEdge && edges < vertices) fail(ErrorCode::kUsage, "fewer edges than vertices");
  Rng rng(seed);
  auto v = static_cast<uint64_t>(vertices);
  std::set<std::pair<int64_t, int64_t>> seen;
  std::vector<std::pair<int64_t, int64_t>> list;
  auto add = [&](int64_t a, int64_t b) {
    if (a != b && seen.emplace(a, b).second) list.emplace_back(a, b);
  };
  if (everyVertexHasOutEdge) {
    for (int64_t a = 0; a < vertices; ++a) add(a, (a + 1 + static_cast<int64_t>(rng.below(v - 1))) % vertices);
  }
  while (static_cast<int64_t>(list.size()) < edges) {
    add(static_cast<int64_t>(rng.below(v)), static_cast<int64_t>(rng.below(v)));
  }
  std::ofstream out = openOut(path);
  for (const auto& [a, b] : list) out << a << ' ' << b << '\n';
  finish(out, path);
}

void generateBlocks(const std::string& path, uint64_t seed, int64_t blocks) {
  Rng rng(seed);
  std::ofstream out = openOut(path);
  char tx[20];
  for (int64_t i = 0; i < blocks; ++i) {
    int transactions = 4 + static_cast<int>(rng.below(5));
    for (int t = 0; t < transactions; ++t) {
      std::snprintf(tx, sizeof tx, "%016" PRIx64, rng.next());
      out << (t ? " " : "") << tx;
    }
    out << '\n';
  }
  finish(out, path);
}

std::vector<std::string> readLines(const std::string& path) {
  std::vector<std::string> out;
  for (const std::string& file : executor::listInputFiles(path)) {
    std::ifstream in(file, std::ios::binary);
    if (!in) fail(ErrorCode::kIo, "cannot read " + file);
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
  }
  return out;
}

}  // namespace ignis::workloads
