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

// ignis-bench: runs one reference workload and reports its metrics.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "ignis/driver/api.hpp"
#include "ignis/error.hpp"
#include "ignis/workloads/workloads.hpp"

namespace {

nlohmann::json toJson(const ignis::workloads::WorkloadSpec& spec, const ignis::workloads::WorkloadResult& r) {
  const auto& m = r.metrics;
  return {
      {"workload", r.name},
      {"executors", r.executors},
      {"seed", spec.seed},
      {"size", spec.size},
      {"iterations", r.iterations},
      {"rows", r.rows.size()},
      {"inputPath", r.inputPath},
      {"outputPath", r.outputPath},
      {"loadPerExecutor", r.loadPerExecutor},
      {"metrics",
       {{"taskExecutions", m.taskExecutions},
        {"stages", m.stages},
        {"partitionPasses", m.partitionPasses},
        {"exchangeMessages", m.exchangeMessages},
        {"exchangeBytes", m.exchangeBytes},
        {"dataFrames", m.dataFrames},
        {"dataBytes", m.dataBytes},
        {"seconds", m.seconds}}},
  };
}

}  // namespace

int main(int argc, char** argv) {
  namespace wl = ignis::workloads;
  CLI::App app{"Runs a reference workload on a local session"};
  wl::WorkloadSpec spec;
  int executors = 1;
  std::string metricsPath;
  app.add_option("workload", spec.name, "Workload name")->required()->check(CLI::IsMember(wl::workloadNames()));
  app.add_option("--executors", executors, "Executor count")->check(CLI::IsMember({1, 2, 4, 8}));
  app.add_option("--seed", spec.seed, "Input generator seed");
  app.add_option("--size", spec.size, "Lines, points or vertices; 0 for the default");
  app.add_option("--edges", spec.edges, "Graph edges; 0 for the default");
  app.add_option("--iterations", spec.iterations, "Iterations of kmeans and pagerank")->check(CLI::NonNegativeNumber);
  app.add_option("--k", spec.k, "K-Means clusters")->check(CLI::PositiveNumber);
  app.add_option("--dim", spec.dim, "K-Means point dimension")->check(CLI::PositiveNumber);
  app.add_option("--rounds", spec.rounds, "Minebench hash rounds")->check(CLI::NonNegativeNumber);
  app.add_option("--partitions", spec.partitions, "Input partitions; 0 for two per executor");
  app.add_flag("--hybrid", spec.hybrid, "Wordcount through the wordcountMerge call");
  app.add_flag("--resident", spec.resident, "K-Means as a resident iteration");
  app.add_option("--work-dir", spec.workDir, "Directory for generated input and output");
  app.add_option("--metrics", metricsPath, "Write the metrics JSON here");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (spec.workDir.empty()) {
    spec.workDir = (std::filesystem::temp_directory_path() / ("ignis-bench-" + spec.name)).string();
  }
  try {
    ignis::driver::Ignis::start();
    wl::WorkloadResult r = wl::runWorkload(spec, executors);
    ignis::driver::Ignis::stop();
    nlohmann::json j = toJson(spec, r);
    std::cout << j.dump(2) << '\n';
    if (!metricsPath.empty()) {
      std::ofstream out(metricsPath);
      out << j.dump(2) << '\n';
      if (!out.flush()) {
        std::cerr << "ignis-bench: cannot write " << metricsPath << '\n';
        return 1;
      }
    }
  } catch (const ignis::Error& e) {
    ignis::driver::Ignis::stop();
    std::cerr << "ignis-bench: " << ignis::errorCodeName(e.code()) << ": " << e.what() << '\n';
    return 1;
  }
  return 0;
}
