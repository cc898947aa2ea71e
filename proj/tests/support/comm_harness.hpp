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

// In-process groups of endpoints for communicator tests.

#include <exception>
#include <functional>
#include <memory>
#include <thread>
#include <vector>

#include "ignis/comms/communicator.hpp"

namespace ignis::testing {

class EndpointGroup {
 public:
  explicit EndpointGroup(int n, int connectTimeoutMs = 5000) {
    for (int i = 0; i < n; ++i) {
      comms::Endpoint::Options o;
      o.connectTimeoutMs = connectTimeoutMs;
      eps_.push_back(std::make_unique<comms::Endpoint>(o));
    }
  }

  int size() const { return static_cast<int>(eps_.size()); }
  comms::Endpoint& at(int i) { return *eps_[i]; }

  std::vector<comms::ProcessAddr> addrs() const {
    std::vector<comms::ProcessAddr> out;
    for (const auto& e : eps_) out.push_back({e->host(), e->port(), "", 0});
    return out;
  }

  comms::CommDesc baseDesc(uint64_t id, const std::string& worker = "w0") const {
    return comms::createBase(id, WorkerDesc{worker, "std", size(), false}, addrs());
  }

  /// Runs fn(rank) on one thread per member and rethrows the first failure.
  static void parallel(int n, const std::function<void(int)>& fn) {
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> ts;
    for (int r = 0; r < n; ++r) {
      ts.emplace_back([&, r] {
        try {
          fn(r);
        } catch (...) {
          errors[r] = std::current_exception();
        }
      });
    }
    for (auto& t : ts) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  /// Opens a communicator per member over `desc` (members must be this
  /// group's endpoints, in order) and runs body on each.
  void run(const comms::CommDesc& desc, const std::function<void(comms::Communicator&)>& body) {
    parallel(desc.size(), [&](int r) {
      comms::Communicator c(at(r), desc, r);
      c.open();
      body(c);
    });
  }

 private:
  std::vector<std::unique_ptr<comms::Endpoint>> eps_;
};

}  // namespace ignis::testing
