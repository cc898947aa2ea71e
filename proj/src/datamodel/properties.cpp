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

#include "ignis/properties.hpp"

#include <charconv>
#include <sstream>

#include "ignis/error.hpp"

#ifndef IGNIS_DEFAULT_EXECUTOR
#define IGNIS_DEFAULT_EXECUTOR "ignis-executor"
#endif

namespace ignis {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

const std::map<std::string, std::string>& Properties::defaults() {
  static const std::map<std::string, std::string> kDefaults = {
      {props::kExecutorInstances, "1"},
      {props::kExecutorCores, "1"},
      {props::kExecutorBinary, IGNIS_DEFAULT_EXECUTOR},
      // 0 means two partitions per executor.
      {props::kPartitionNumber, "0"},
      {props::kPartitionStorage, "memory"},
      {props::kPartitionCompression, "6"},
      {props::kPartitionDiskDir, "/tmp/ignis"},
      {props::kTransportHost, "127.0.0.1"},
      {props::kTransportPorts, ""},
      {props::kTransportConnectTimeout, "10000"},
      {props::kHeartbeatInterval, "2000"},
      {props::kHeartbeatMisses, "3"},
      {props::kRecoveryAttempts, "3"},
      {props::kIterateMax, "100"},
      {props::kCollectLimit, "268435456"},
      {props::kWorkerShared, "false"},
  };
  return kDefaults;
}

bool Properties::contains(const std::string& key) const {
  return entries_.count(key) != 0 || defaults().count(key) != 0;
}

std::string Properties::get(const std::string& key) const {
  if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  if (auto it = defaults().find(key); it != defaults().end()) return it->second;
  fail(ErrorCode::kUsage, "property '" + key + "' is not set and has no default");
}

std::string Properties::getOr(const std::string& key, const std::string& fallback) const {
  return contains(key) ? get(key) : fallback;
}

int64_t Properties::getInt(const std::string& key) const {
  std::string s = trim(get(key));
  int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    fail(ErrorCode::kUsage, "property '" + key + "' is not an integer: '" + s + "'");
  }
  return v;
}

bool Properties::getBool(const std::string& key) const {
  std::string s = trim(get(key));
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no" || s.empty()) return false;
  fail(ErrorCode::kUsage, "property '" + key + "' is not a boolean: '" + s + "'");
}

std::vector<uint16_t> Properties::getPorts(const std::string& key) const {
  std::vector<uint16_t> ports;
  std::stringstream ss(get(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    int v = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size() || v <= 0 || v > 65535) {
      fail(ErrorCode::kUsage, "invalid port '" + item + "' in " + key);
    }
    ports.push_back(static_cast<uint16_t>(v));
  }
  return ports;
}

void Properties::merge(const Properties& other) {
  for (const auto& [k, v] : other.entries_) entries_[k] = v;
}

Value Properties::toValue() const {
  ValueList items;
  items.reserve(entries_.size());
  for (const auto& [k, v] : entries_) items.push_back(Value::pair(Value::str(k), Value::str(v)));
  return Value::list(std::move(items));
}

Properties Properties::fromValue(const Value& v) {
  Properties p;
  for (const Value& item : v.asList()) p.set(item.first().asStr(), item.second().asStr());
  return p;
}

Properties Properties::parse(const std::string& text) {
  Properties p;
  std::stringstream ss(text);
  std::string line;
  int lineNo = 0;
  while (std::getline(ss, line)) {
    ++lineNo;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos || eq == 0) {
      fail(ErrorCode::kUsage, "line " + std::to_string(lineNo) + ": expected key=value");
    }
    p.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return p;
}

std::string Properties::format() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + "=" + v + "\n";
  return out;
}

}  // namespace ignis
