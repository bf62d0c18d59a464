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

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace echotb {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }
inline std::string to_string(ByteView b) { return std::string(b.begin(), b.end()); }

std::string base64_encode(ByteView data);
// Throws Error(malformed) on bad alphabet or padding.
Bytes base64_decode(std::string_view text);

std::string hex_encode(ByteView data);
Bytes hex_decode(std::string_view text);

bool contains(ByteView haystack, ByteView needle);

inline void append(Bytes& out, ByteView more) { out.insert(out.end(), more.begin(), more.end()); }

void put_u16(Bytes& out, std::uint16_t v);
void put_u32(Bytes& out, std::uint32_t v);
void put_u64(Bytes& out, std::uint64_t v);
std::uint16_t get_u16(ByteView in, std::size_t at);
std::uint32_t get_u32(ByteView in, std::size_t at);

}  // namespace echotb
