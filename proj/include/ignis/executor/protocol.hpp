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
#include <map>
#include <string>
#include <vector>

#include "ignis/error.hpp"
#include "ignis/value.hpp"

namespace ignis::executor {

/// Named arguments, carried on the wire as List[Pair(Str name, Value)].
class Args {
 public:
  Args() = default;

  static Args fromValue(const Value& v);
  Value toValue() const;

  Args& set(const std::string& key, Value v) {
    m_[key] = std::move(v);
    return *this;
  }
  bool has(const std::string& key) const { return m_.count(key) != 0; }
  /// kProtocol if absent.
  const Value& get(const std::string& key) const;
  const Value& getOr(const std::string& key, const Value& fallback) const;
  int64_t i64(const std::string& key) const { return get(key).asI64(); }
  int64_t i64Or(const std::string& key, int64_t fallback) const;
  double f64(const std::string& key) const;
  const std::string& str(const std::string& key) const { return get(key).asStr(); }
  bool flag(const std::string& key, bool fallback = false) const;

  const std::map<std::string, Value>& entries() const { return m_; }

 private:
  std::map<std::string, Value> m_;
};

/// An operator invocation: Pair(Str name, Args).
struct OpSpec {
  std::string name;
  Args args;

  Value toValue() const { return Value::pair(Value::str(name), args.toValue()); }
  static OpSpec fromValue(const Value& v) { return {v.first().asStr(), Args::fromValue(v.second())}; }
};

/// Control commands from the driver to an executor. A command frame carries
/// Pair(Str name, Args) and the request id as the frame sequence number. The
/// reply is List[I64 status, payload]: status 0 with the result, or status 1
/// with the encoded error List[I64 code, Str message, I64 rank].
namespace cmd {
inline constexpr const char* kConfigure = "configure";
inline constexpr const char* kCommCreate = "comm.create";
inline constexpr const char* kCommDrop = "comm.drop";
inline constexpr const char* kLibraryLoad = "library.load";
inline constexpr const char* kStage = "stage";
inline constexpr const char* kAction = "action";
inline constexpr const char* kImport = "import";
inline constexpr const char* kFree = "free";
inline constexpr const char* kRestore = "restore";
inline constexpr const char* kMetrics = "metrics";
inline constexpr const char* kPing = "ping";
inline constexpr const char* kShutdown = "shutdown";
}  // namespace cmd

/// Operators that run element by element (or partition by partition) and are
/// fused into one pass.
bool isNarrowOp(const std::string& name);

/// Register payload sent by a starting executor.
struct Registration {
  std::string workerId;
  int rank = 0;
  int64_t pid = 0;
  std::string host;
  uint16_t port = 0;

  Value toValue() const;
  static Registration fromValue(const Value& v);
};

Value okReply(Value payload);
Value errorReply(const Error& e);
/// Returns the payload or throws the carried error.
Value unwrapReply(const Value& reply);

Value errorToValue(const Error& e);
Error errorFromValue(const Value& v);

}  // namespace ignis::executor
