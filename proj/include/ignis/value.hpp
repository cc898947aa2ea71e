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

#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace ignis {

class Value;
using ValueList = std::vector<Value>;

/// Tagged element carried by every operator, the storage tiers and the wire.
///
/// Values are immutable once built. Pair and List payloads are held behind
/// shared pointers so copies are cheap and safe to share across threads.
class Value {
 public:
  /// Tag bytes are part of the TLV encoding; the order also defines the
  /// primary key of the total order.
  enum class Tag : uint8_t {
    kNull = 0,
    kBool = 1,
    kI64 = 2,
    kF64 = 3,
    kStr = 4,
    kBytes = 5,
    kPair = 6,
    kList = 7,
  };

  Value() = default;
  explicit Value(bool v) : data_(v) {}
  explicit Value(int64_t v) : data_(v) {}
  explicit Value(double v);
  explicit Value(std::string v) : data_(std::move(v)) {}
  explicit Value(const char* v) : data_(std::string(v)) {}

  static Value null() { return Value(); }
  static Value boolean(bool v) { return Value(v); }
  static Value i64(int64_t v) { return Value(v); }
  /// NaN inputs are canonicalised to a single quiet NaN bit pattern.
  static Value f64(double v) { return Value(v); }
  static Value str(std::string v) { return Value(std::move(v)); }
  static Value bytes(std::string v);
  static Value pair(Value first, Value second);
  static Value list(ValueList items);

  Tag tag() const { return static_cast<Tag>(data_.index()); }
  bool isNull() const { return tag() == Tag::kNull; }
  bool isBool() const { return tag() == Tag::kBool; }
  bool isI64() const { return tag() == Tag::kI64; }
  bool isF64() const { return tag() == Tag::kF64; }
  bool isStr() const { return tag() == Tag::kStr; }
  bool isBytes() const { return tag() == Tag::kBytes; }
  bool isPair() const { return tag() == Tag::kPair; }
  bool isList() const { return tag() == Tag::kList; }

  // Typed accessors throw ErrorCode::kType on a tag mismatch.
  bool asBool() const;
  int64_t asI64() const;
  double asF64() const;
  const std::string& asStr() const;
  const std::string& asBytes() const;
  const Value& first() const;
  const Value& second() const;
  const ValueList& asList() const;

  /// Human-readable rendering. Top-level strings are emitted raw, nested
  /// strings are quoted; used for text output files and diagnostics.
  std::string toString() const;

 private:
  struct BytesBox {
    std::string data;
  };
  struct PairBox;

  using Storage = std::variant<std::monostate, bool, int64_t, double, std::string, BytesBox,
                               std::shared_ptr<const PairBox>, std::shared_ptr<const ValueList>>;

  Storage data_;
};

struct Value::PairBox {
  Value first;
  Value second;
};

const char* tagName(Value::Tag tag);

// Canonical TLV codec.
void appendValue(std::string& out, const Value& v);
std::string serializeValue(const Value& v);
/// Decodes one Value starting at `offset`, advancing it past the record.
Value decodeValue(std::string_view data, size_t& offset);
/// Decodes a complete buffer; trailing bytes are a malformed-encoding error.
Value deserializeValue(std::string_view data);

/// Total order: tag rank first, then the natural order inside a tag.
/// F64 uses IEEE totalOrder semantics (-0.0 < +0.0, NaN last) so that equal
/// values always share one canonical encoding.
std::strong_ordering compareValues(const Value& a, const Value& b);

inline bool operator==(const Value& a, const Value& b) { return compareValues(a, b) == 0; }
inline std::strong_ordering operator<=>(const Value& a, const Value& b) { return compareValues(a, b); }

/// FNV-1a 64-bit over the canonical TLV encoding.
uint64_t hashValue(const Value& v);

/// FNV-1a 64-bit over raw bytes.
uint64_t fnv1a64(std::string_view data, uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace ignis

template <>
struct std::hash<ignis::Value> {
  size_t operator()(const ignis::Value& v) const { return static_cast<size_t>(ignis::hashValue(v)); }
};
