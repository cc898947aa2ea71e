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


#include "ignis/executor/protocol.hpp"

#include <set>

namespace ignis::executor {

Args Args::fromValue(const Value& v) {
  Args a;
  if (v.isNull()) return a;
  for (const Value& item : v.asList()) a.m_[item.first().asStr()] = item.second();
  return a;
}

Value Args::toValue() const {
  ValueList items;
  items.reserve(m_.size());
  for (const auto& [k, v] : m_) items.push_back(Value::pair(Value::str(k), v));
  return Value::list(std::move(items));
}

const Value& Args::get(const std::string& key) const {
  auto it = m_.find(key);
  if (it == m_.end()) fail(ErrorCode::kProtocol, "missing argument '" + key + "'");
  return it->second;
}

const Value& Args::getOr(const std::string& key, const Value& fallback) const {
  auto it = m_.find(key);
  return it == m_.end() ? fallback : it->second;
}

int64_t Args::i64Or(const std::string& key, int64_t fallback) const {
  auto it = m_.find(key);
  return it == m_.end() || it->second.isNull() ? fallback : it->second.asI64();
}

double Args::f64(const std::string& key) const {
  const Value& v = get(key);
  return v.isI64() ? static_cast<double>(v.asI64()) : v.asF64();
}

bool Args::flag(const std::string& key, bool fallback) const {
  auto it = m_.find(key);
  return it == m_.end() || it->second.isNull() ? fallback : it->second.asBool();
}

bool isNarrowOp(const std::string& name) {
  static const std::set<std::string> kNarrow = {"map",    "filter",        "flatmap", "keyBy",  "mapValues",
                                                "keys",   "values",        "mapPartitions",   "sample",
                                                "sampleByKey"};
  return kNarrow.count(name) != 0;
}

Value Registration::toValue() const {
  return Value::list({Value::str(workerId), Value::i64(rank), Value::i64(pid), Value::str(host), Value::i64(port)});
}

Registration Registration::fromValue(const Value& v) {
  const ValueList& f = v.asList();
  if (f.size() != 5) fail(ErrorCode::kProtocol, "malformed registration");
  return {f[0].asStr(), static_cast<int>(f[1].asI64()), f[2].asI64(), f[3].asStr(),
          static_cast<uint16_t>(f[4].asI64())};
}

Value errorToValue(const Error& e) {
  return Value::list({Value::i64(static_cast<int64_t>(e.code())), Value::str(e.what()), Value::i64(e.rank())});
}

Error errorFromValue(const Value& v) {
  const ValueList& f = v.asList();
  return Error(static_cast<ErrorCode>(f.at(0).asI64()), f.at(1).asStr(), static_cast<int32_t>(f.at(2).asI64()));
}

Value okReply(Value payload) { return Value::list({Value::i64(0), std::move(payload)}); }

Value errorReply(const Error& e) { return Value::list({Value::i64(1), errorToValue(e)}); }

Value unwrapReply(const Value& reply) {
  const ValueList& f = reply.asList();
  if (f.size() != 2) fail(ErrorCode::kProtocol, "malformed reply");
  if (f[0].asI64() != 0) throw errorFromValue(f[1]);
  return f[1];
}

}  // namespace ignis::executor
