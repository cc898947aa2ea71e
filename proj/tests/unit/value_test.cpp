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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "ignis/bytes.hpp"
#include "ignis/error.hpp"
#include "ignis/properties.hpp"
#include "ignis/value.hpp"
#include "json.hpp"
#include "support/value_gen.hpp"

namespace ignis {
namespace {

std::string hex(const std::string& s) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (unsigned char c : s) {
    out.push_back(digits[c >> 4]);
    out.push_back(digits[c & 15]);
  }
  return out;
}

// Same order as tests/oracles/tlv_oracle.py VECTORS.
std::vector<Value> goldenValues() {
  return {
      Value::null(),
      Value::boolean(false),
      Value::boolean(true),
      Value::i64(0),
      Value::i64(1),
      Value::i64(-1),
      Value::i64(std::numeric_limits<int64_t>::min()),
      Value::i64(std::numeric_limits<int64_t>::max()),
      Value::f64(0.0),
      Value::f64(-0.0),
      Value::f64(1.5),
      Value::f64(std::numeric_limits<double>::infinity()),
      Value::f64(std::nan("")),
      Value::str(""),
      Value::str("a"),
      Value::str("h\xc3\xa9llo"),
      Value::bytes(""),
      Value::bytes(std::string("\x00\xff", 2)),
      Value::pair(Value::str("a"), Value::i64(2)),
      Value::list({}),
      Value::list({Value::i64(1), Value::i64(2)}),
      Value::list({Value::pair(Value::null(), Value::boolean(true)), Value::list({Value::str("x")}),
                   Value::f64(-2.25)}),
  };
}

std::vector<std::string> readRecords(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<std::string> out;
  ByteReader r(data);
  while (!r.atEnd()) {
    uint32_t n = r.u32();
    out.emplace_back(r.bytes(n));
  }
  return out;
}

TEST(ValueTest, SerializeExamples) {
  EXPECT_EQ(serializeValue(Value::null()), std::string(1, '\0'));
  EXPECT_EQ(hex(serializeValue(Value::i64(1))), "020100000000000000");
  EXPECT_EQ(hex(serializeValue(Value::pair(Value::str("a"), Value::i64(2)))),
            "06" + hex(serializeValue(Value::str("a"))) + hex(serializeValue(Value::i64(2))));
}

TEST(ValueTest, DeserializeExamples) {
  EXPECT_TRUE(deserializeValue(std::string(1, '\0')).isNull());
  Value list = Value::list({Value::i64(1), Value::i64(2)});
  EXPECT_EQ(deserializeValue(serializeValue(list)), list);
  try {
    deserializeValue("\xff");
    FAIL() << "expected malformed-encoding";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedEncoding);
    EXPECT_NE(std::string(e.what()).find("offset 0"), std::string::npos);
  }
}

TEST(ValueTest, DeserializeReportsTruncationOffset) {
  std::string enc = serializeValue(Value::list({Value::i64(1), Value::str("abc")}));
  for (size_t cut = 0; cut < enc.size(); ++cut) {
    try {
      deserializeValue(enc.substr(0, cut));
      FAIL() << "prefix of length " << cut << " decoded";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kMalformedEncoding);
      EXPECT_NE(std::string(e.what()).find("offset"), std::string::npos);
    }
  }
  EXPECT_THROW(deserializeValue(enc + "x"), Error);
  EXPECT_THROW(deserializeValue(std::string("\x01\x02", 2)), Error);  // Bool byte must be 0/1
}

TEST(ValueTest, CompareExamples) {
  EXPECT_EQ(compareValues(Value::i64(1), Value::i64(2)), std::strong_ordering::less);
  EXPECT_EQ(compareValues(Value::str("b"), Value::i64(9)), std::strong_ordering::greater);
  EXPECT_EQ(compareValues(Value::f64(std::nan("")), Value::f64(1.0)), std::strong_ordering::greater);
  EXPECT_EQ(compareValues(Value::f64(std::nan("")), Value::f64(std::numeric_limits<double>::infinity())),
            std::strong_ordering::greater);
  // I64 and F64 are not cross-compared numerically.
  EXPECT_LT(Value::i64(100), Value::f64(-5.0));
  EXPECT_LT(Value::f64(-0.0), Value::f64(0.0));
  EXPECT_LT(Value::list({Value::i64(1)}), Value::list({Value::i64(1), Value::i64(0)}));
  EXPECT_LT(Value::pair(Value::i64(1), Value::i64(9)), Value::pair(Value::i64(2), Value::i64(0)));
}

TEST(ValueTest, HashExamples) {
  // Independent FNV-1a of the 5-byte encoding 04 00 00 00 00, computed by
  // tests/oracles/tlv_oracle.py.
  EXPECT_EQ(hashValue(Value::str("")), 0xb200c32f2fee3fc3ULL);
  Value k = Value::str("key");
  EXPECT_EQ(hashValue(Value::pair(k, Value::i64(1)).first()), hashValue(Value::pair(k, Value::i64(2)).first()));
  EXPECT_NE(hashValue(Value::pair(k, Value::i64(1))), hashValue(Value::pair(k, Value::i64(2))));
}

TEST(ValueTest, GoldenVectorsDecodeBitExactly) {
  auto records = readRecords(IGNIS_TEST_DATA "/tlv_vectors.bin");
  auto expected = goldenValues();
  ASSERT_EQ(records.size(), expected.size());
  std::ifstream mf(IGNIS_TEST_DATA "/vectors_manifest.json");
  auto manifest = nlohmann::json::parse(mf);
  for (size_t i = 0; i < records.size(); ++i) {
    SCOPED_TRACE(manifest["tlv"][i]["name"].get<std::string>());
    EXPECT_EQ(deserializeValue(records[i]), expected[i]);
    EXPECT_EQ(serializeValue(expected[i]), records[i]);
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hashValue(expected[i])));
    EXPECT_EQ(std::string(buf), manifest["tlv"][i]["fnv1a64"].get<std::string>());
  }
}

TEST(ValueTest, PropertyRoundtrip) {
  testing::ValueGen gen(1);
  for (int i = 0; i < 2000; ++i) {
    Value v = gen.any(5);
    std::string enc = serializeValue(v);
    Value back = deserializeValue(enc);
    ASSERT_EQ(back, v) << v.toString();
    ASSERT_EQ(serializeValue(back), enc);
  }
}

TEST(ValueTest, PropertyInjectiveEncoding) {
  testing::ValueGen gen(2);
  std::vector<Value> vs;
  for (int i = 0; i < 400; ++i) vs.push_back(gen.any(4));
  for (const Value& a : vs) {
    for (const Value& b : vs) {
      bool sameBytes = serializeValue(a) == serializeValue(b);
      ASSERT_EQ(sameBytes, a == b) << a.toString() << " vs " << b.toString();
    }
  }
}

TEST(ValueTest, PropertyOrderIsTotal) {
  testing::ValueGen gen(3);
  std::vector<Value> vs;
  for (int i = 0; i < 300; ++i) vs.push_back(gen.any(5));
  for (const Value& a : vs) {
    for (const Value& b : vs) {
      auto ab = compareValues(a, b);
      auto ba = compareValues(b, a);
      ASSERT_EQ(ab < 0, ba > 0);
      ASSERT_EQ(ab == 0, ba == 0);
    }
  }
  // Transitivity via sorting: a sorted sequence is pairwise ordered and is a
  // permutation of the input.
  std::vector<Value> sorted = vs;
  std::sort(sorted.begin(), sorted.end(), [](const Value& a, const Value& b) { return a < b; });
  for (size_t i = 0; i + 1 < sorted.size(); ++i) ASSERT_TRUE(compareValues(sorted[i], sorted[i + 1]) <= 0);
  for (size_t i = 0; i < sorted.size(); ++i) {
    for (size_t j = i + 1; j < sorted.size(); j += 17) ASSERT_TRUE(compareValues(sorted[i], sorted[j]) <= 0);
  }
  auto count = [](const std::vector<Value>& xs, const Value& v) { return std::count(xs.begin(), xs.end(), v); };
  for (const Value& v : vs) ASSERT_EQ(count(vs, v), count(sorted, v));
}

TEST(ValueTest, PropertyHashStable) {
  testing::ValueGen gen(4);
  for (int i = 0; i < 500; ++i) {
    Value v = gen.any(5);
    Value copy = deserializeValue(serializeValue(v));
    ASSERT_EQ(hashValue(v), hashValue(v));
    ASSERT_EQ(hashValue(v), hashValue(copy));
    ASSERT_EQ(hashValue(v), fnv1a64(serializeValue(v)));
  }
}

TEST(ValueTest, AccessorTypeErrors) {
  try {
    Value::i64(1).asStr();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kType);
  }
  EXPECT_THROW(Value::str("x").first(), Error);
}

TEST(ValueTest, ToStringRendering) {
  EXPECT_EQ(Value::str("abc").toString(), "abc");
  EXPECT_EQ(Value::pair(Value::str("a"), Value::i64(2)).toString(), "(\"a\", 2)");
  EXPECT_EQ(Value::list({Value::boolean(true), Value::null()}).toString(), "[true, null]");
}

TEST(PropertiesTest, DefaultsAndOverrides) {
  Properties p;
  EXPECT_EQ(p.getInt(props::kExecutorInstances), 1);
  EXPECT_EQ(p.getInt(props::kPartitionCompression), 6);
  p.set(props::kExecutorInstances, "4");
  EXPECT_EQ(p.getInt(props::kExecutorInstances), 4);
  EXPECT_THROW(p.get("no.such.key"), Error);
  p.set(props::kTransportPorts, "5000, 5001,5002");
  EXPECT_EQ(p.getPorts(props::kTransportPorts), (std::vector<uint16_t>{5000, 5001, 5002}));
  Properties back = Properties::fromValue(p.toValue());
  EXPECT_EQ(back.entries(), p.entries());
  Properties parsed = Properties::parse("# comment\n a = b \n\nc=d=e\n");
  EXPECT_EQ(parsed.get("a"), "b");
  EXPECT_EQ(parsed.get("c"), "d=e");
  EXPECT_THROW(Properties::parse("novalue\n"), Error);
}

}  // namespace
}  // namespace ignis
