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

#pragma once

#include "echotb/bytes.hpp"

#include <cstdint>

namespace echotb::wire {

// Multiplexing layer of the persistent AVS connection:
// u32 stream id || u32 length || bytes.
struct Frame {
  std::uint32_t stream = 0;
  Bytes data;
  bool operator==(const Frame&) const = default;
};

inline constexpr std::uint32_t kControlStream = 1;
inline constexpr std::uint32_t kEventStream = 3;

Bytes frame_encode(const Frame& frame);
// Throws Error(truncated) or Error(length_mismatch).
Frame frame_decode(ByteView bytes);

}  // namespace echotb::wire
