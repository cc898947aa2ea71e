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


#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ignis/executor/ops.hpp"
#include "json.hpp"

namespace ignis::executor {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void ioFail(const std::string& what, const std::string& path) {
  fail(ErrorCode::kIo, what + " '" + path + "'");
}

uint64_t fileSize(const std::string& path) {
  std::error_code ec;
  uint64_t n = fs::file_size(path, ec);
  if (ec) ioFail("cannot stat", path);
  return n;
}

std::string partFileName(int64_t index, const char* suffix) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "part-%05lld%s", static_cast<long long>(index), suffix);
  return buf;
}

void ensureDir(const std::string& path) {
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec && !fs::is_directory(path)) ioFail("cannot create directory", path);
}

/// Assigns whole files to executors in contiguous blocks; one partition each.
template <class Read>
Dataset readPerFile(const TaskEnv& env, const std::string& path, Read read) {
  std::vector<std::string> files = listInputFiles(path);
  int64_t n = static_cast<int64_t>(files.size());
  int64_t lo = blockStart(env.rank(), n, env.size());
  int64_t hi = blockStart(env.rank() + 1, n, env.size());
  Dataset out;
  for (int64_t j = lo; j < hi; ++j) {
    PartRef part = env.newPartition(static_cast<size_t>(j - lo));
    read(files[static_cast<size_t>(j)], *part);
    out.parts.push_back(std::move(part));
  }
  return out;
}

std::string base64(const std::string& in) {
  static const char* kAlphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  size_t i = 0;
  for (; i + 2 < in.size(); i += 3) {
    uint32_t v = (static_cast<uint8_t>(in[i]) << 16) | (static_cast<uint8_t>(in[i + 1]) << 8) |
                 static_cast<uint8_t>(in[i + 2]);
    for (int s = 18; s >= 0; s -= 6) out.push_back(kAlphabet[(v >> s) & 63]);
  }
  size_t rest = in.size() - i;
  if (rest > 0) {
    uint32_t v = static_cast<uint8_t>(in[i]) << 16;
    if (rest == 2) v |= static_cast<uint8_t>(in[i + 1]) << 8;
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out.push_back(rest == 2 ? kAlphabet[(v >> 6) & 63] : '=');
    out.push_back('=');
  }
  return out;
}

nlohmann::json toJson(const Value& v) {
  switch (v.tag()) {
    case Value::Tag::kNull: return nullptr;
    case Value::Tag::kBool: return v.asBool();
    case Value::Tag::kI64: return v.asI64();
    case Value::Tag::kF64:
      if (!std::isfinite(v.asF64())) fail(ErrorCode::kIo, "JSON cannot represent " + v.toString());
      return v.asF64();
    case Value::Tag::kStr: return v.asStr();
    case Value::Tag::kBytes: return base64(v.asBytes());
    case Value::Tag::kPair: return nlohmann::json::array({toJson(v.first()), toJson(v.second())});
    case Value::Tag::kList: {
      nlohmann::json arr = nlohmann::json::array();
      for (const Value& x : v.asList()) arr.push_back(toJson(x));
      return arr;
    }
  }
  return nullptr;
}

Value fromJson(const nlohmann::json& j) {
  switch (j.type()) {
    case nlohmann::json::value_t::null: return Value::null();
    case nlohmann::json::value_t::boolean: return Value::boolean(j.get<bool>());
    case nlohmann::json::value_t::number_integer: return Value::i64(j.get<int64_t>());
    case nlohmann::json::value_t::number_unsigned: {
      uint64_t u = j.get<uint64_t>();
      if (u > static_cast<uint64_t>(INT64_MAX)) return Value::f64(static_cast<double>(u));
      return Value::i64(static_cast<int64_t>(u));
    }
    case nlohmann::json::value_t::number_float: return Value::f64(j.get<double>());
    case nlohmann::json::value_t::string: return Value::str(j.get<std::string>());
    case nlohmann::json::value_t::array: {
      ValueList items;
      for (const auto& x : j) items.push_back(fromJson(x));
      return Value::list(std::move(items));
    }
    case nlohmann::json::value_t::object: {
      ValueList items;
      for (const auto& [k, x] : j.items()) items.push_back(Value::pair(Value::str(k), fromJson(x)));
      return Value::list(std::move(items));
    }
    default: fail(ErrorCode::kIo, "unsupported JSON value");
  }
}

template <class Write>
void writeParts(const TaskEnv& env, const Dataset& input, const std::string& path, const char* suffix, Write write) {
  ensureDir(path);
  GlobalOffset g = globalOffset(env.ctx.comm, static_cast<int64_t>(input.parts.size()));
  for (size_t j = 0; j < input.parts.size(); ++j) {
    std::string file = (fs::path(path) / partFileName(g.offset + static_cast<int64_t>(j), suffix)).string();
    write(*input.parts[j], file);
  }
}

std::ofstream openOut(const std::string& file) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) ioFail("cannot write", file);
  return out;
}

}  // namespace

std::vector<std::string> listInputFiles(const std::string& path) {
  std::error_code ec;
  if (fs::is_directory(path, ec)) {
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(path, ec)) {
      std::string name = entry.path().filename().string();
      if (entry.is_regular_file() && !name.empty() && name[0] != '.' && name[0] != '_') {
        files.push_back(entry.path().string());
      }
    }
    std::sort(files.begin(), files.end());
    return files;
  }
  if (!fs::is_regular_file(path, ec)) ioFail("no such input", path);
  return {path};
}

std::vector<TextSplit> planTextSplits(const std::string& path, int64_t minPartitions) {
  std::vector<std::string> files = listInputFiles(path);
  std::vector<uint64_t> sizes;
  uint64_t total = 0;
  for (const std::string& f : files) {
    sizes.push_back(fileSize(f));
    total += sizes.back();
  }
  uint64_t want = static_cast<uint64_t>(std::max<int64_t>(1, minPartitions));
  std::vector<TextSplit> splits;
  for (size_t i = 0; i < files.size(); ++i) {
    uint64_t size = sizes[i];
    uint64_t k = total == 0 ? 1 : std::max<uint64_t>(1, (want * size + total - 1) / total);
    k = std::min<uint64_t>(k, std::max<uint64_t>(1, size));
    for (uint64_t s = 0; s < k; ++s) splits.push_back({files[i], s * size / k, (s + 1) * size / k});
  }
  return splits;
}

std::string sanitizeUtf8(std::string_view s) {
  static const std::string kReplacement = "\xEF\xBF\xBD";
  std::string out;
  out.reserve(s.size());
  size_t i = 0;
  while (i < s.size()) {
    auto c = static_cast<uint8_t>(s[i]);
    size_t len = 0;
    uint32_t min = 0;
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      min = 0x80;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      min = 0x800;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      min = 0x10000;
    }
    bool ok = len != 0 && i + len <= s.size();
    uint32_t cp = len == 0 ? 0 : (c & (0xFF >> (len + 1)));
    for (size_t k = 1; ok && k < len; ++k) {
      auto cc = static_cast<uint8_t>(s[i + k]);
      if ((cc & 0xC0) != 0x80) {
        ok = false;
      } else {
        cp = (cp << 6) | (cc & 0x3F);
      }
    }
    ok = ok && cp >= min && cp <= 0x10FFFF && !(cp >= 0xD800 && cp <= 0xDFFF);
    if (ok) {
      out.append(s.substr(i, len));
      i += len;
    } else {
      out += kReplacement;
      ++i;
    }
  }
  return out;
}

std::vector<std::string> readSplitLines(const TextSplit& split) {
  std::ifstream in(split.path, std::ios::binary);
  if (!in) ioFail("cannot read", split.path);
  uint64_t pos = split.begin;
  if (pos > 0) {
    // A line belongs to the split holding its first byte.
    in.seekg(static_cast<std::streamoff>(pos - 1));
    int c;
    while ((c = in.get()) != EOF && c != '\n') ++pos;
    if (c == EOF) return {};
  }
  std::vector<std::string> lines;
  std::string line;
  while (pos < split.end && std::getline(in, line)) {
    pos += line.size() + (in.eof() ? 0 : 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(sanitizeUtf8(line));
  }
  return lines;
}

Dataset readTextFile(const TaskEnv& env, const std::string& path, int64_t minPartitions) {
  std::vector<TextSplit> splits = planTextSplits(path, minPartitions);
  int64_t n = static_cast<int64_t>(splits.size());
  int64_t lo = blockStart(env.rank(), n, env.size());
  int64_t hi = blockStart(env.rank() + 1, n, env.size());
  Dataset out;
  out.parts.resize(static_cast<size_t>(hi - lo));
  parallelFor(out.parts.size(), env.threads, [&](size_t j, int) {
    PartRef part = env.newPartition(j);
    for (std::string& line : readSplitLines(splits[static_cast<size_t>(lo) + j])) part->append(Value::str(std::move(line)));
    out.parts[j] = std::move(part);
  });
  return out;
}

Dataset readJsonFiles(const TaskEnv& env, const std::string& path) {
  return readPerFile(env, path, [](const std::string& file, storage::Partition& part) {
    std::ifstream in(file, std::ios::binary);
    if (!in) ioFail("cannot read", file);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Value v = jsonToValue(text);
    if (!v.isList()) fail(ErrorCode::kIo, "JSON file '" + file + "' is not a top-level array");
    for (const Value& x : v.asList()) part.append(x);
  });
}

Dataset readObjectFiles(const TaskEnv& env, const std::string& path) {
  return readPerFile(env, path, [](const std::string& file, storage::Partition& part) {
    storage::Partition::openFile(file).forEach([&](const Value& x) { part.append(x); });
  });
}

std::string valueToJson(const Value& v) { return toJson(v).dump(); }

Value jsonToValue(std::string_view text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) fail(ErrorCode::kIo, "malformed JSON");
  return fromJson(j);
}

void writeTextFiles(const TaskEnv& env, const Dataset& input, const std::string& path) {
  writeParts(env, input, path, "", [](const storage::Partition& part, const std::string& file) {
    std::ofstream out = openOut(file);
    part.forEach([&](const Value& x) { out << x.toString() << '\n'; });
    if (!out.flush()) ioFail("cannot write", file);
  });
}

void writeJsonFiles(const TaskEnv& env, const Dataset& input, const std::string& path) {
  writeParts(env, input, path, ".json", [](const storage::Partition& part, const std::string& file) {
    nlohmann::json arr = nlohmann::json::array();
    part.forEach([&](const Value& x) { arr.push_back(toJson(x)); });
    std::ofstream out = openOut(file);
    out << arr.dump() << '\n';
    if (!out.flush()) ioFail("cannot write", file);
  });
}

void writeObjectFiles(const TaskEnv& env, const Dataset& input, const std::string& path, int level) {
  writeParts(env, input, path, ".ignp", [level](const storage::Partition& part, const std::string& file) {
    std::ofstream out = openOut(file);
    out << storage::partitionBytes(part, level);
    if (!out.flush()) ioFail("cannot write", file);
  });
}

}  // namespace ignis::executor
