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

// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails or exceeds its time budget.

#include <CLI11.hpp>
#include <json.hpp>

#include <signal.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "ignis/bytes.hpp"
#include "ignis/driver/api.hpp"
#include "ignis/error.hpp"
#include "ignis/executor/protocol.hpp"
#include "ignis/storage/partition.hpp"
#include "ignis/workloads/workloads.hpp"
#include "oracle/collective_suite.hpp"
#include "oracle/operator_suite.hpp"
#include "oracle/workload_oracles.hpp"
#include "support/session.hpp"

namespace {

using namespace ignis;
using driver::ICluster;
using driver::IDataFrame;
using driver::Ignis;
using driver::ISource;
using driver::IWorker;
using testing::Session;
using workloads::WorkloadResult;
using workloads::WorkloadSpec;

struct Verdict {
  bool ok = true;
  std::string detail;
};

/// Collects the first failed expectation of a criterion.
class Checker {
 public:
  void expect(bool cond, const std::string& what) {
    if (!cond && ok_) {
      ok_ = false;
      first_ = what;
    }
  }
  void note(const std::string& s) { notes_ += (notes_.empty() ? "" : "; ") + s; }
  Verdict verdict() const { return {ok_, ok_ ? notes_ : first_}; }

 private:
  bool ok_ = true;
  std::string first_;
  std::string notes_;
};

std::string scratch(const std::string& name) { return testing::scratchDir("acceptance/" + name); }

WorkloadSpec spec(const std::string& name, int64_t size, const std::string& dir) {
  WorkloadSpec s;
  s.name = name;
  s.seed = 2026;
  s.size = size;
  s.workDir = scratch(dir);
  return s;
}

std::vector<Value> sorted(std::vector<Value> v) { return testing::sorted(std::move(v)); }

// Criteria.

Verdict operatorSuite() {
  oracle::OperatorSuiteOptions o;
  o.casesPerOp = 200;
  o.executors = {1, 2, 4};
  o.scratch = scratch("operators");
  auto outcomes = oracle::runOperatorSuite(o);
  Checker c;
  std::map<std::string, std::set<int>> covered;
  for (const auto& r : outcomes) {
    c.expect(r.failures == 0, r.op + " p=" + std::to_string(r.executors) + ": " + std::to_string(r.failures) +
                                  " failing cases, first: " + r.firstFailure);
    c.expect(r.cases >= 200, r.op + " p=" + std::to_string(r.executors) + " ran only " + std::to_string(r.cases));
    covered[r.op].insert(r.executors);
  }
  for (const std::string& op : oracle::operatorNames()) {
    c.expect(covered[op] == std::set<int>{1, 2, 4}, op + " not run for every executor count");
  }
  c.note(std::to_string(oracle::operatorNames().size()) + " operators x p{1,2,4} x 200 cases");
  return c.verdict();
}

Verdict collectiveSuite() {
  oracle::CollectiveSuiteOptions o;
  o.sizes = {1, 2, 4, 8};
  auto outcomes = oracle::runCollectiveSuite(o);
  Checker c;
  std::set<std::string> checks;
  bool concurrent = false;
  for (const auto& r : outcomes) {
    c.expect(r.failures == 0, r.check + " p=" + std::to_string(r.size) + ": " + r.firstFailure);
    checks.insert(r.check);
    if (r.check.find("concurrent") != std::string::npos) concurrent = true;
  }
  c.expect(concurrent, "no concurrent-communicator check ran");
  c.note(std::to_string(checks.size()) + " checks x p{1,2,4,8}, " + std::to_string(o.rounds) + " rounds each");
  return c.verdict();
}

Verdict terasort() {
  Session s(1);
  WorkloadSpec ws = spec("terasort", 100000, "terasort");
  WorkloadResult r = workloads::runWorkload(ws, 4);
  Checker c;
  std::string err = oracle::checkWorkload(ws, r);
  c.expect(err.empty(), err);
  int64_t maxLoad = 0;
  for (int64_t l : r.loadPerExecutor) maxLoad = std::max(maxLoad, l);
  c.note("n=100000 p=4, max executor load " + std::to_string(maxLoad) + " <= 2n/p = 50000");
  return c.verdict();
}

Verdict transitiveClosure() {
  Session s(1);
  Checker c;
  std::vector<Value> first;
  for (int p : {1, 2, 4}) {
    WorkloadSpec ws = spec("transitiveClosure", 0, "tc" + std::to_string(p));
    WorkloadResult r = workloads::runWorkload(ws, p);
    std::string err = oracle::checkWorkload(ws, r);
    c.expect(err.empty(), "p=" + std::to_string(p) + ": " + err);
    if (p == 1) {
      first = r.rows;
      c.expect(oracle::parseEdges(workloads::readLines(r.inputPath)).size() == 200, "input does not have 200 edges");
      c.note("75 vertices / 200 edges, closure " + std::to_string(r.rows.size()) + " pairs after " +
             std::to_string(r.iterations) + " rounds");
    } else {
      c.expect(r.rows == first, "p=" + std::to_string(p) + " differs from p=1");
    }
  }
  return c.verdict();
}

Verdict pagerank() {
  Session s(1);
  Checker c;
  std::vector<Value> first;
  for (int p : {1, 2, 4}) {
    WorkloadSpec ws = spec("pagerank", 100, "pr" + std::to_string(p));
    WorkloadResult r = workloads::runWorkload(ws, p);
    std::string err = oracle::checkWorkload(ws, r);
    c.expect(err.empty(), "p=" + std::to_string(p) + ": " + err);
    c.expect(r.iterations == 10, "ran " + std::to_string(r.iterations) + " iterations");
    if (p == 1) {
      first = r.rows;
    } else {
      c.expect(serializeValue(Value::list(r.rows)) == serializeValue(Value::list(first)),
               "p=" + std::to_string(p) + " ranks are not bit-identical to p=1");
    }
  }
  c.note("100 vertices, 10 iterations, |rank - dense oracle| <= 1e-6, bit-identical for p{1,2,4}");
  return c.verdict();
}

int64_t metric(const IWorker& w, const std::string& key) {
  return executor::Args::fromValue(Ignis::backend().metrics(w.id())).i64Or(key, 0);
}

Verdict lazyCaching() {
  Session s(2);
  Checker c;
  auto& b = Ignis::backend();
  ICluster cluster;
  IWorker w(cluster);
  // Action <- T3 <- {T1, T2}.
  auto build = [&] {
    IDataFrame t1 = w.parallelize(testing::range(60), 4).map("lambda x: (x % 6, x)");
    IDataFrame t2 = w.parallelize(testing::range(30), 3).map("lambda x: (x % 6, 0 - x)");
    return std::array<IDataFrame, 3>{t1, t2, t1.join(t2)};
  };
  auto execs = [&](const std::array<IDataFrame, 3>& t) {
    return std::array<int64_t, 3>{b.execCount(t[0].id()), b.execCount(t[1].id()), b.execCount(t[2].id())};
  };
  int64_t expected = 6 * 10 * 5;

  int64_t before = b.taskExecutions();
  auto t = build();
  t[2].cache();
  c.expect(b.taskExecutions() == before, "recording and cache() executed tasks");
  c.expect(metric(w, "stages") == 0 && metric(w, "partitionPasses") == 0, "executors did work before any action");

  c.expect(t[2].count() == expected, "first action result");
  c.expect(execs(t) == std::array<int64_t, 3>{1, 1, 1}, "first action did not run T1, T2, T3 exactly once");
  int64_t passes = metric(w, "partitionPasses");
  c.expect(t[2].count() == expected, "second action result");
  c.expect(static_cast<int64_t>(t[2].collect().size()) == expected, "collect size");
  c.expect(execs(t) == std::array<int64_t, 3>{1, 1, 1}, "cached T3 or its inputs were recomputed");
  IDataFrame above = t[2].mapValues("lambda v: fst v + snd v");
  c.expect(above.count() == expected, "downstream action result");
  c.expect(execs(t) == std::array<int64_t, 3>{1, 1, 1}, "a new action above cached T3 recomputed it");
  c.expect(metric(w, "partitionPasses") > passes, "downstream action did no work");

  auto u = build();
  u[0].cache();
  u[1].cache();
  c.expect(u[2].count() == expected && u[2].count() == expected, "cached-inputs result");
  c.expect(execs(u) == std::array<int64_t, 3>{1, 1, 2}, "cached T1/T2 recomputed when uncached T3 reran");
  u[0].unpersist();
  c.expect(u[2].count() == expected, "result after unpersist");
  c.expect(execs(u) == std::array<int64_t, 3>{2, 1, 3}, "unpersisted T1 did not rerun exactly once");
  c.note("no-action: 0 tasks, 0 stages; cached: T1/T2/T3 ran once over 3 actions");
  return c.verdict();
}

void killRank(const IWorker& w, int rank) {
  for (const auto& e : w.executors()) {
    if (e.rank == rank) ::kill(e.pid, SIGKILL);
  }
}

std::vector<Value> countTable(const std::map<std::string, int64_t>& m) {
  std::vector<Value> out;
  for (const auto& [k, v] : m) out.push_back(Value::pair(Value::str(k), Value::i64(v)));
  return out;
}

Verdict faultRecovery(const std::string& testlib) {
  Checker c;
  std::string dir = scratch("recovery");
  std::string text = dir + "/text.txt";
  workloads::generateText(text, 99, 3000);
  auto expected = countTable(oracle::wordCounts(workloads::readLines(text)));
  {
    Session s(4);
    ICluster cluster;
    IWorker w(cluster);
    IDataFrame counts = w.textFile(text, 8).flatmap("words").map("lambda w: (w, 1)").reduceByKey("add");
    Ignis::backend().setStageHook([&](const scheduler::StageEvent& ev) {
      if (ev.index == 1 && ev.attempt == 0 && !ev.dispatched) killRank(w, 2);
    });
    std::vector<Value> got = sorted(counts.collect());
    Ignis::backend().setStageHook(nullptr);
    auto st = Ignis::backend().recoveryStats();
    c.expect(got == expected, "between stages: output differs from the oracle");
    c.expect(st.replacements == 1, "between stages: " + std::to_string(st.replacements) + " replacements");
    c.expect(st.recomputedTasks <= st.lostTasks, "between stages: recomputed " + std::to_string(st.recomputedTasks) +
                                                      " > lost " + std::to_string(st.lostTasks));
    c.note("between stages: recomputed " + std::to_string(st.recomputedTasks) + " <= lost " +
           std::to_string(st.lostTasks));
  }
  {
    Session s(4);
    ICluster cluster;
    IWorker w(cluster);
    w.loadLibrary(testlib);
    ISource fn("crashOnceMidCollective");
    fn.addParam("victim", Value::i64(2)).addParam("marker", Value::str(dir + "/crashed"));
    IDataFrame out = w.call(fn, w.parallelize(testing::range(500), 8));
    std::vector<Value> got = sorted(out.collect());
    auto st = Ignis::backend().recoveryStats();
    c.expect(std::filesystem::exists(dir + "/crashed"), "mid-collective: the victim never crashed");
    c.expect(got == testing::range(500), "mid-collective: output differs from the oracle");
    c.expect(st.replacements == 1, "mid-collective: " + std::to_string(st.replacements) + " replacements");
    c.expect(st.recomputedTasks <= st.lostTasks, "mid-collective: recomputed " + std::to_string(st.recomputedTasks) +
                                                     " > lost " + std::to_string(st.lostTasks));
    c.note("mid-collective: recomputed " + std::to_string(st.recomputedTasks) + " <= lost " +
           std::to_string(st.lostTasks));
  }
  {
    Session s(4);
    ICluster cluster;
    IWorker w(cluster);
    IDataFrame pairs = w.textFile(text, 8).flatmap("words").map("lambda w: (w, 1)");
    pairs.persist(storage::StoreKind::disk("", 6));
    c.expect(pairs.count() > 0, "cached upstream: empty input");
    IDataFrame counts = pairs.reduceByKey("add");
    Ignis::backend().setStageHook([&](const scheduler::StageEvent& ev) {
      if (ev.attempt == 0 && ev.dispatched) killRank(w, 1);
    });
    std::vector<Value> got = sorted(counts.collect());
    Ignis::backend().setStageHook(nullptr);
    auto st = Ignis::backend().recoveryStats();
    c.expect(got == expected, "cached upstream: output differs from the oracle");
    c.expect(st.replacements == 1, "cached upstream: " + std::to_string(st.replacements) + " replacements");
    c.expect(Ignis::backend().execCount(pairs.id()) == 1, "cached upstream was recomputed");
    c.expect(st.recomputedTasks <= st.lostTasks, "cached upstream: recomputed > lost");
    c.note("cached upstream recomputed 0 times");
  }
  return c.verdict();
}

Verdict iterationResidency() {
  Session s(1);
  WorkloadSpec ws = spec("kmeans", 4000, "kmeans");
  ws.resident = true;
  WorkloadResult r = workloads::runWorkload(ws, 4);
  Checker c;
  std::string err = oracle::checkWorkload(ws, r);
  c.expect(err.empty(), err);
  c.expect(r.pids.size() == 10, "observed " + std::to_string(r.pids.size()) + " iterations");
  std::set<int64_t> ids(r.pids.empty() ? std::set<int64_t>{} : std::set<int64_t>(r.pids[0].begin(), r.pids[0].end()));
  c.expect(ids.size() == 4, "expected 4 distinct executor pids");
  for (const auto& round : r.pids) c.expect(round == r.pids.front(), "executor pid set changed between iterations");
  c.note("10 iterations, 4 executors, pid set constant, centroids match Lloyd within 1e-9");
  return c.verdict();
}

Verdict hybrid() {
  Session s(1);
  Checker c;
  for (int p : {2, 4}) {
    WorkloadSpec ws = spec("wordcount", 5000, "hybrid" + std::to_string(p));
    WorkloadResult pure = workloads::runWorkload(ws, p);
    ws.hybrid = true;
    WorkloadResult mixed = workloads::runWorkload(ws, p);
    c.expect(mixed.rows == pure.rows, "p=" + std::to_string(p) + ": hybrid differs from pure-operator wordcount");
    std::string err = oracle::checkWorkload(ws, mixed);
    c.expect(err.empty(), err);
    if (p == 4) c.note(std::to_string(pure.rows.size()) + " distinct words, identical for p{2,4}");
  }
  return c.verdict();
}

std::string unhex(const std::string& h) {
  std::string out;
  for (size_t i = 0; i + 1 < h.size(); i += 2) out.push_back(static_cast<char>(std::stoi(h.substr(i, 2), nullptr, 16)));
  return out;
}

std::vector<std::string> lengthPrefixed(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<std::string> out;
  ByteReader r(data);
  while (!r.atEnd()) out.emplace_back(r.bytes(r.u32()));
  return out;
}

Verdict formats(const std::string& dataDir) {
  Checker c;
  std::ifstream mf(dataDir + "/vectors_manifest.json");
  nlohmann::json manifest = nlohmann::json::parse(mf);
  auto tlv = lengthPrefixed(dataDir + "/tlv_vectors.bin");
  c.expect(tlv.size() == manifest["tlv"].size(), "TLV vector count differs from the manifest");
  for (size_t i = 0; i < tlv.size() && i < manifest["tlv"].size(); ++i) {
    const auto& m = manifest["tlv"][i];
    std::string name = m["name"];
    c.expect(tlv[i] == unhex(m["hex"]), name + ": file bytes differ from the manifest");
    Value v = deserializeValue(tlv[i]);
    c.expect(serializeValue(v) == tlv[i], name + ": re-encoding is not bit-exact");
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hashValue(v)));
    c.expect(buf == m["fnv1a64"].get<std::string>(), name + ": hash differs");
  }
  auto containers = lengthPrefixed(dataDir + "/container_vectors.bin");
  c.expect(containers.size() == manifest["containers"].size(), "container count differs from the manifest");
  std::map<uint64_t, std::string> level0Bodies;
  int compressed = 0;
  for (size_t i = 0; i < containers.size() && i < manifest["containers"].size(); ++i) {
    const auto& m = manifest["containers"][i];
    std::string name = m["name"];
    const std::string& bytes = containers[i];
    storage::ContainerHeader h = storage::parseContainerHeader(bytes);
    c.expect(h.level == m["level"].get<int>(), name + ": level");
    c.expect(h.count == m["count"].get<uint64_t>(), name + ": count");
    std::string body = bytes.substr(storage::kContainerHeaderSize);
    std::string raw = unhex(m["raw_body_hex"]);
    std::string decoded = h.level > 0 ? storage::zlibDecompress(body) : body;
    c.expect(decoded == raw, name + ": body differs from the manifest");
    std::vector<Value> values = storage::containerValues(bytes);
    std::string level0 = storage::partitionBytes(storage::Partition::fromValues(values), 0);
    c.expect(level0.substr(storage::kContainerHeaderSize) == raw, name + ": level-0 re-encoding differs");
    if (h.level > 0) {
      ++compressed;
      c.expect(storage::zlibDecompress(body) == level0.substr(storage::kContainerHeaderSize),
               name + ": decompressed body is not the level-0 body");
    }
  }
  c.expect(compressed > 0, "no compressed container vectors");
  c.note(std::to_string(tlv.size()) + " TLV vectors, " + std::to_string(containers.size()) + " containers (" +
         std::to_string(compressed) + " compressed)");
  return c.verdict();
}

struct Criterion {
  std::string name;
  double budgetSeconds;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Runs the acceptance criteria"};
  std::string dataDir = IGNIS_TEST_DATA;
  std::string testlib = IGNIS_TESTLIB;
  std::vector<std::string> only;
  bool list = false;
  app.add_option("--data", dataDir, "Directory of the golden vectors");
  app.add_option("--testlib", testlib, "Test function library");
  app.add_option("--only", only, "Run only these criteria");
  app.add_flag("--list", list, "List the criteria");
  CLI11_PARSE(app, argc, argv);

  std::vector<Criterion> criteria{
      {"operator-oracle-suite", 300, operatorSuite},
      {"collectives", 120, collectiveSuite},
      {"psrs-terasort", 60, terasort},
      {"transitive-closure", 60, transitiveClosure},
      {"pagerank", 60, pagerank},
      {"lazy-caching", 30, lazyCaching},
      {"fault-recovery", 120, [&] { return faultRecovery(testlib); }},
      {"iteration-residency", 60, iterationResidency},
      {"hybrid-wordcount", 30, hybrid},
      {"formats", 30, [&] { return formats(dataDir); }},
  };
  int failed = 0;
  for (const Criterion& cr : criteria) {
    if (list) {
      std::cout << cr.name << '\n';
      continue;
    }
    if (!only.empty() && std::find(only.begin(), only.end(), cr.name) == only.end()) continue;
    auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = cr.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
      if (Ignis::started()) Ignis::stop();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (v.ok && secs > cr.budgetSeconds) v = {false, "over the time budget; " + v.detail};
    if (!v.ok) ++failed;
    char timing[64];
    std::snprintf(timing, sizeof timing, "(%.1f s, budget %.0f s)", secs, cr.budgetSeconds);
    std::cout << (v.ok ? "PASS " : "FAIL ") << cr.name << ' ' << timing << ": " << v.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
