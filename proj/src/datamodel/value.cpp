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

#include "ignis/value.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>

#include "ignis/bytes.hpp"
#include "ignis/error.hpp"

namespace ignis {

namespace {

constexpr uint64_t kCanonicalNaN = 0x7ff8000000000000ULL;
constexpr int kMaxDecodeDepth = 512;

uint64_t doubleBits(double v) { return std::bit_cast<uint64_t>(v); }

[[noreturn]] void typeMismatch(const char* expected, Value::Tag got) {
  fail(ErrorCode::kType, std::string("expected ") + expected + ", got " + tagName(got));
}

// Sinks let the same encoder feed a byte string or the FNV hasher.
struct StringSink {
  std::string& out;
  void put(const char* p, size_t n) { out.append(p, n); }
  void byte(uint8_t b) { out.push_back(static_cast<char>(b)); }
};

struct FnvSink {
  uint64_t h = 0xcbf29ce484222325ULL;
  void put(const char* p, size_t n) {
    for (size_t i = 0; i < n; ++i) byte(static_cast<uint8_t>(p[i]));
  }
  void byte(uint8_t b) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
};

template <typename Sink>
void putLE(Sink& sink, uint64_t v, int width) {
  for (int i = 0; i < width; ++i) sink.byte(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

template <typename Sink>
void encode(Sink& sink, const Value& v) {
  sink.byte(static_cast<uint8_t>(v.tag()));
  switch (v.tag()) {
    case Value::Tag::kNull:
      return;
    case Value::Tag::kBool:
      sink.byte(v.asBool() ? 1 : 0);
      return;
    case Value::Tag::kI64:
      putLE(sink, static_cast<uint64_t>(v.asI64()), 8);
      return;
    case Value::Tag::kF64:
      putLE(sink, doubleBits(v.asF64()), 8);
      return;
    case Value::Tag::kStr:
    case Value::Tag::kBytes: {
      const std::string& s = v.isStr() ? v.asStr() : v.asBytes();
      putLE(sink, static_cast<uint32_t>(s.size()), 4);
      sink.put(s.data(), s.size());
      return;
    }
    case Value::Tag::kPair:
      encode(sink, v.first());
      encode(sink, v.second());
      return;
    case Value::Tag::kList: {
      const ValueList& items = v.asList();
      putLE(sink, static_cast<uint32_t>(items.size()), 4);
      for (const Value& item : items) encode(sink, item);
      return;
    }
  }
}

Value decode(ByteReader& in, int depth) {
  if (depth > kMaxDecodeDepth) in.malformed("nesting too deep");
  size_t tagOffset = in.offset();
  uint8_t tag = in.u8();
  switch (tag) {
    case 0:
      return Value();
    case 1: {
      uint8_t b = in.u8();
      if (b > 1) in.malformed("invalid Bool byte " + std::to_string(b));
      return Value(b == 1);
    }
    case 2:
      return Value(static_cast<int64_t>(in.u64()));
    case 3: {
      uint64_t bits = in.u64();
      double d = std::bit_cast<double>(bits);
      if (std::isnan(d) && bits != kCanonicalNaN) in.malformed("non-canonical NaN");
      return Value(d);
    }
    case 4:
    case 5: {
      uint32_t len = in.u32();
      std::string s(in.bytes(len));
      return tag == 4 ? Value::str(std::move(s)) : Value::bytes(std::move(s));
    }
    case 6: {
      Value a = decode(in, depth + 1);
      Value b = decode(in, depth + 1);
      return Value::pair(std::move(a), std::move(b));
    }
    case 7: {
      uint32_t count = in.u32();
      ValueList items;
      // Each element needs at least one byte; reject absurd counts up front.
      if (count > in.remaining()) in.malformed("List count exceeds input");
      items.reserve(count);
      for (uint32_t i = 0; i < count; ++i) items.push_back(decode(in, depth + 1));
      return Value::list(std::move(items));
    }
    default:
      fail(ErrorCode::kMalformedEncoding,
           "unknown tag " + std::to_string(tag) + " at byte offset " + std::to_string(tagOffset));
  }
}

template <typename T>
std::strong_ordering cmp(const T& a, const T& b) {
  if (a < b) return std::strong_ordering::less;
  if (b < a) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

// IEEE totalOrder restricted to canonical NaN: map the bits to a signed key
// that orders -inf < ... < -0 < +0 < ... < +inf < NaN.
int64_t totalOrderKey(double d) {
  auto bits = static_cast<int64_t>(doubleBits(d));
  return bits < 0 ? bits ^ std::numeric_limits<int64_t>::max() : bits;
}

void appendQuoted(std::string& out, const std::string& s) {
  out.push_back('"');
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
}

void render(std::string& out, const Value& v, bool nested) {
  switch (v.tag()) {
    case Value::Tag::kNull:
      out += "null";
      return;
    case Value::Tag::kBool:
      out += v.asBool() ? "true" : "false";
      return;
    case Value::Tag::kI64:
      out += std::to_string(v.asI64());
      return;
    case Value::Tag::kF64: {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.17g", v.asF64());
      out += buf;
      return;
    }
    case Value::Tag::kStr:
      if (nested) {
        appendQuoted(out, v.asStr());
      } else {
        out += v.asStr();
      }
      return;
    case Value::Tag::kBytes: {
      static const char* hex = "0123456789abcdef";
      out += "0x";
      for (unsigned char c : v.asBytes()) {
        out.push_back(hex[c >> 4]);
        out.push_back(hex[c & 15]);
      }
      return;
    }
    case Value::Tag::kPair:
      out.push_back('(');
      render(out, v.first(), true);
      out += ", ";
      render(out, v.second(), true);
      out.push_back(')');
      return;
    case Value::Tag::kList: {
      out.push_back('[');
      bool firstItem = true;
      for (const Value& item : v.asList()) {
        if (!firstItem) out += ", ";
        firstItem = false;
        render(out, item, true);
      }
      out.push_back(']');
      return;
    }
  }
}

}  // namespace

Value::Value(double v) : data_(std::isnan(v) ? std::bit_cast<double>(kCanonicalNaN) : v) {}

Value Value::bytes(std::string v) {
  Value out;
  out.data_ = BytesBox{std::move(v)};
  return out;
}

Value Value::pair(Value first, Value second) {
  Value out;
  out.data_ = std::make_shared<const PairBox>(PairBox{std::move(first), std::move(second)});
  return out;
}

Value Value::list(ValueList items) {
  Value out;
  out.data_ = std::make_shared<const ValueList>(std::move(items));
  return out;
}

bool Value::asBool() const {
  if (!isBool()) typeMismatch("Bool", tag());
  return std::get<bool>(data_);
}

int64_t Value::asI64() const {
  if (!isI64()) typeMismatch("I64", tag());
  return std::get<int64_t>(data_);
}

double Value::asF64() const {
  if (!isF64()) typeMismatch("F64", tag());
  return std::get<double>(data_);
}

const std::string& Value::asStr() const {
  if (!isStr()) typeMismatch("Str", tag());
  return std::get<std::string>(data_);
}

const std::string& Value::asBytes() const {
  if (!isBytes()) typeMismatch("Bytes", tag());
  return std::get<BytesBox>(data_).data;
}

const Value& Value::first() const {
  if (!isPair()) typeMismatch("Pair", tag());
  return std::get<std::shared_ptr<const PairBox>>(data_)->first;
}

const Value& Value::second() const {
  if (!isPair()) typeMismatch("Pair", tag());
  return std::get<std::shared_ptr<const PairBox>>(data_)->second;
}

const ValueList& Value::asList() const {
  if (!isList()) typeMismatch("List", tag());
  return *std::get<std::shared_ptr<const ValueList>>(data_);
}

std::string Value::toString() const {
  std::string out;
  render(out, *this, false);
  return out;
}

const char* tagName(Value::Tag tag) {
  switch (tag) {
    case Value::Tag::kNull: return "Null";
    case Value::Tag::kBool: return "Bool";
    case Value::Tag::kI64: return "I64";
    case Value::Tag::kF64: return "F64";
    case Value::Tag::kStr: return "Str";
    case Value::Tag::kBytes: return "Bytes";
    case Value::Tag::kPair: return "Pair";
    case Value::Tag::kList: return "List";
  }
  return "?";
}

void appendValue(std::string& out, const Value& v) {
  StringSink sink{out};
  encode(sink, v);
}

std::string serializeValue(const Value& v) {
  std::string out;
  appendValue(out, v);
  return out;
}

Value decodeValue(std::string_view data, size_t& offset) {
  ByteReader in(data.substr(offset));
  Value v = decode(in, 0);
  offset += in.offset();
  return v;
}

Value deserializeValue(std::string_view data) {
  ByteReader in(data);
  Value v = decode(in, 0);
  if (!in.atEnd()) in.malformed("trailing bytes after value");
  return v;
}

std::strong_ordering compareValues(const Value& a, const Value& b) {
  if (a.tag() != b.tag()) return cmp(static_cast<int>(a.tag()), static_cast<int>(b.tag()));
  switch (a.tag()) {
    case Value::Tag::kNull:
      return std::strong_ordering::equal;
    case Value::Tag::kBool:
      return cmp(a.asBool(), b.asBool());
    case Value::Tag::kI64:
      return cmp(a.asI64(), b.asI64());
    case Value::Tag::kF64:
      return cmp(totalOrderKey(a.asF64()), totalOrderKey(b.asF64()));
    case Value::Tag::kStr:
      return cmp(a.asStr(), b.asStr());
    case Value::Tag::kBytes:
      return cmp(a.asBytes(), b.asBytes());
    case Value::Tag::kPair: {
      auto c = compareValues(a.first(), b.first());
      return c != 0 ? c : compareValues(a.second(), b.second());
    }
    case Value::Tag::kList: {
      const ValueList& x = a.asList();
      const ValueList& y = b.asList();
      size_t n = std::min(x.size(), y.size());
      for (size_t i = 0; i < n; ++i) {
        auto c = compareValues(x[i], y[i]);
        if (c != 0) return c;
      }
      return cmp(x.size(), y.size());
    }
  }
  return std::strong_ordering::equal;
}

uint64_t hashValue(const Value& v) {
  FnvSink sink;
  encode(sink, v);
  return sink.h;
}

uint64_t fnv1a64(std::string_view data, uint64_t seed) {
  FnvSink sink{seed};
  sink.put(data.data(), data.size());
  return sink.h;
}

}  // namespace ignis
