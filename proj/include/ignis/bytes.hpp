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
#include <cstring>
#include <string>
#include <string_view>

#include "ignis/error.hpp"

namespace ignis {

// Little-endian fixed-width helpers shared by the TLV codec, the partition
// container and the wire frames.

inline void putU8(std::string& out, uint8_t v) { out.push_back(static_cast<char>(v)); }

inline void putU16(std::string& out, uint16_t v) {
  for (int i = 0; i < 2; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void putU32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void putU64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline uint64_t loadLE(const char* p, int width) {
  uint64_t v = 0;
  for (int i = width - 1; i >= 0; --i) v = (v << 8) | static_cast<uint8_t>(p[i]);
  return v;
}

/// Bounds-checked cursor over a byte string. Every read past the end raises
/// `errorCode` with the offending offset in the message.
class ByteReader {
 public:
  explicit ByteReader(std::string_view data, ErrorCode errorCode = ErrorCode::kMalformedEncoding)
      : data_(data), errorCode_(errorCode) {}

  size_t offset() const { return offset_; }
  size_t remaining() const { return data_.size() - offset_; }
  bool atEnd() const { return offset_ == data_.size(); }

  uint8_t u8() { return static_cast<uint8_t>(take(1)[0]); }
  uint16_t u16() { return static_cast<uint16_t>(loadLE(take(2), 2)); }
  uint32_t u32() { return static_cast<uint32_t>(loadLE(take(4), 4)); }
  uint64_t u64() { return loadLE(take(8), 8); }

  std::string_view bytes(size_t n) { return {take(n), n}; }

  [[noreturn]] void malformed(const std::string& what) const {
    fail(errorCode_, what + " at byte offset " + std::to_string(offset_));
  }

 private:
  const char* take(size_t n) {
    if (n > remaining()) {
      malformed("truncated input: need " + std::to_string(n) + " bytes, have " +
                std::to_string(remaining()));
    }
    const char* p = data_.data() + offset_;
    offset_ += n;
    return p;
  }

  std::string_view data_;
  size_t offset_ = 0;
  ErrorCode errorCode_;
};

}  // namespace ignis
