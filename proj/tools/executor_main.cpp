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


#include <signal.h>
#include <sys/prctl.h>
#include <unistd.h>

#include <iostream>

#include "CLI11.hpp"
#include "ignis/error.hpp"
#include "ignis/executor/service.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Ignis executor process (started by the driver)"};
  ignis::executor::ExecutorService::Options opts;
  int64_t parent = 0;
  app.add_option("--driver", opts.driverKey, "driver transport key host:port")->required();
  app.add_option("--worker", opts.workerId, "worker id")->required();
  app.add_option("--rank", opts.rank, "executor rank within the worker")->required();
  app.add_option("--host", opts.host, "address to listen on");
  app.add_option("--port", opts.port, "port to listen on (0 picks a free one)");
  app.add_option("--connect-timeout", opts.connectTimeoutMs, "connect timeout in ms");
  app.add_option("--parent", parent, "driver pid; the executor exits when it is gone");
  CLI11_PARSE(app, argc, argv);

  ::prctl(PR_SET_PDEATHSIG, SIGKILL);
  if (parent > 0 && ::getppid() != parent) return 1;
  try {
    ignis::executor::ExecutorService service(opts);
    return service.run();
  } catch (const ignis::Error& e) {
    std::cerr << "ignis-executor: " << ignis::errorCodeName(e.code()) << ": " << e.what() << "\n";
    return 1;
  }
}
