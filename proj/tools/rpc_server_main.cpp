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

// ignis-rpc-server: serves the driver API to remote clients.

#include <CLI11.hpp>

#include <csignal>
#include <iostream>

#include "ignis/driver/api.hpp"
#include "ignis/driver/rpc.hpp"
#include "ignis/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Serves the Ignis driver API over the remote protocol"};
  std::string host = "127.0.0.1";
  uint16_t port = 0;
  std::string propertiesFile;
  std::vector<std::string> overrides;
  app.add_option("--host", host, "Listen address");
  app.add_option("--port", port, "Listen port; 0 picks a free one");
  app.add_option("--properties-file", propertiesFile, "key=value file applied before the overrides");
  app.add_option("--properties", overrides, "K=V property override")->allow_extra_args(false);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  try {
    ignis::driver::IProperties props =
        propertiesFile.empty() ? ignis::driver::IProperties() : ignis::driver::IProperties::load(propertiesFile);
    for (const std::string& kv : overrides) {
      size_t eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) {
        std::cerr << "ignis-rpc-server: --properties expects K=V, got '" << kv << "'\n";
        return 2;
      }
      props.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    ignis::driver::Ignis::start(props);
    ignis::driver::RpcServer server(port, host);
    std::cout << "listening on " << host << ":" << server.port() << std::endl;
    int sig = 0;
    sigwait(&set, &sig);
    server.stop();
    ignis::driver::Ignis::stop();
  } catch (const ignis::Error& e) {
    std::cerr << "ignis-rpc-server: " << ignis::errorCodeName(e.code()) << ": " << e.what() << '\n';
    ignis::driver::Ignis::stop();
    return 1;
  }
  return 0;
}
