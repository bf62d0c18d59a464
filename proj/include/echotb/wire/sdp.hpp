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
#include <string>
#include <vector>

namespace echotb::wire {

inline constexpr std::size_t kSdesKeyLen = 32;
inline constexpr std::size_t kSdesSaltLen = 14;
inline constexpr std::string_view kSdesSuite = "AES_256_CM_HMAC_SHA1_80";

struct Candidate {
  enum class Type { host, relay };
  Type type = Type::host;
  std::string address;
  std::uint16_t port = 0;
  bool operator==(const Candidate&) const = default;
};

struct SdesCrypto {
  std::string suite{kSdesSuite};
  Bytes key_salt;  // 32-byte master key followed by 14-byte master salt
  bool operator==(const SdesCrypto&) const = default;
};

struct SdpBody {
  std::uint64_t session_id = 0;
  std::uint16_t media_port = 0;
  std::vector<Candidate> candidates;
  SdesCrypto crypto;
  bool operator==(const SdpBody&) const = default;
};

Bytes sdp_encode(const SdpBody& body);
SdpBody sdp_decode(ByteView bytes);

}  // namespace echotb::wire
