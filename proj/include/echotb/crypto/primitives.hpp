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

namespace echotb::crypto {

inline constexpr std::size_t kAesKeyLen = 32;
inline constexpr std::size_t kAesBlock = 16;

// AES-256-CBC with PKCS#7 padding. Decrypt throws Error(bad_padding).
Bytes aes256_cbc_encrypt(ByteView key, ByteView iv, ByteView plaintext);
Bytes aes256_cbc_decrypt(ByteView key, ByteView iv, ByteView ciphertext);
// Unpadded block core; input must be a multiple of the block size.
Bytes aes256_cbc_encrypt_blocks(ByteView key, ByteView iv, ByteView plaintext);

// AES-256 in counter mode; the 16-byte counter block is incremented big-endian.
Bytes aes256_ctr(ByteView key, ByteView counter_block, ByteView data);

Bytes sha256(ByteView data);
Bytes hmac_sha256(ByteView key, ByteView data);
Bytes hmac_sha1(ByteView key, ByteView data);

bool constant_time_equal(ByteView a, ByteView b) noexcept;

}  // namespace echotb::crypto
