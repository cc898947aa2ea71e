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

#include "ignis/comms/frame.hpp"

#include "ignis/bytes.hpp"

namespace ignis::comms {

std::string encodeFrame(const Frame& f) {
  if (f.payload.size() > kMaxFrameBody - kFrameHeaderSize) {
    fail(ErrorCode::kPrecondition, "frame payload of " + std::to_string(f.payload.size()) + " bytes is too large");
  }
  std::string out;
  out.reserve(kFrameLengthSize + kFrameHeaderSize + f.payload.size());
  putU32(out, static_cast<uint32_t>(kFrameHeaderSize + f.payload.size()));
  putU64(out, f.commId);
  putU32(out, f.epoch);
  putU32(out, f.seq);
  putU16(out, static_cast<uint16_t>(f.opcode));
  putU16(out, f.channel);
  out.append(f.payload);
  return out;
}

Frame decodeFrameBody(std::string_view body) {
  ByteReader r(body, ErrorCode::kProtocol);
  Frame f;
  f.commId = r.u64();
  f.epoch = r.u32();
  f.seq = r.u32();
  f.opcode = static_cast<Opcode>(r.u16());
  f.channel = r.u16();
  f.payload = std::string(r.bytes(r.remaining()));
  return f;
}

}  // namespace ignis::comms
