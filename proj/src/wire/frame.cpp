/*
 *    Copyright (c) 2026 The Echo Testbed Authors.
 *    All rights reserved.
 *
 *    Licensed under the Apache License, Version 2.0 (the "License");
 *    you may not use this file except in compliance with the License.
 *    You may obtain a copy of the License at
 *
 *        http://www.apache.org/licenses/LICENSE-2.0
 *
 *    Unless required by applicable law or agreed to in writing, software
 *    distributed under the License is distributed on an "AS IS" BASIS,
 *    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *    See the License for the specific language governing permissions and
 *    limitations under the License.
 */

#include "echotb/wire/frame.hpp"

#include "echotb/error.hpp"

namespace echotb::wire {

Bytes frame_encode(const Frame& frame) {
  Bytes out;
  out.reserve(8 + frame.data.size());
  put_u32(out, frame.stream);
  put_u32(out, static_cast<std::uint32_t>(frame.data.size()));
  append(out, frame.data);
  return out;
}

Frame frame_decode(ByteView bytes) {
  if (bytes.size() < 8) throw Error(Errc::truncated, "frame header needs 8 bytes");
  Frame f;
  f.stream = get_u32(bytes, 0);
  std::uint32_t len = get_u32(bytes, 4);
  if (bytes.size() - 8 < len) throw Error(Errc::truncated, "frame body shorter than its length");
  if (bytes.size() - 8 > len) throw Error(Errc::length_mismatch, "trailing bytes after frame");
  f.data.assign(bytes.begin() + 8, bytes.end());
  return f;
}

}  // namespace echotb::wire
