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
#include <string>
#include <string_view>

namespace ignis::comms {

enum class Opcode : uint16_t {
  kHello = 1,
  kHandshake = 2,
  kVerdict = 3,
  kData = 4,
  kPointToPoint = 5,
  kAbort = 6,
  kControl = 16,
  kReply = 17,
  kPing = 18,
  kPong = 19,
  kRegister = 20,
};

/// One transport message. On the wire: u32 length of everything after the
/// length field, u64 commId, u32 epoch, u32 seq, u16 opcode, u16 channel,
/// payload; all little-endian.
struct Frame {
  uint64_t commId = 0;
  uint32_t epoch = 0;
  uint32_t seq = 0;
  Opcode opcode = Opcode::kData;
  uint16_t channel = 0;
  std::string payload;
};

inline constexpr size_t kFrameLengthSize = 4;
inline constexpr size_t kFrameHeaderSize = 20;
inline constexpr uint32_t kMaxFrameBody = 0x7fffffffu;

std::string encodeFrame(const Frame& f);

/// Decodes the bytes following the length field.
Frame decodeFrameBody(std::string_view body);

}  // namespace ignis::comms
