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
#include "echotb/crypto/keys.hpp"

#include <cstdint>
#include <string>

namespace echotb::crypto {

struct AuthTokenClaims {
  std::string account;
  std::string serial;
  std::int64_t issued = 0;  // unix seconds
  bool operator==(const AuthTokenClaims&) const = default;
};

/// Cloud-opaque device token. Layout (cloud side only):
///   "AT1" || iv(16) || u16 len || wrapped data key || ciphertext || tag(32)
/// The data key is wrapped to the cloud keypair; the tag is HMAC-SHA256 over
/// everything before it under a key derived from the data key.
using AuthToken = Bytes;

AuthToken mint_auth_token(const AsymKeypair& cloud, const std::string& account,
                          const std::string& serial, std::int64_t now, SeededRng& rng);
// Throws Error(auth_failed) on any tampering or wrong keypair.
AuthTokenClaims open_auth_token(const AsymKeypair& cloud, ByteView token);

}  // namespace echotb::crypto
