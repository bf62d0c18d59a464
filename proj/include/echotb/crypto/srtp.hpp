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

namespace echotb::crypto {

inline constexpr std::size_t kSrtpMasterKeyLen = 32;
inline constexpr std::size_t kSrtpMasterSaltLen = 14;
inline constexpr std::size_t kSrtpHeaderLen = 12;
inline constexpr std::size_t kSrtpTagLen = 10;
inline constexpr std::size_t kReplayWindow = 64;
inline constexpr std::uint64_t kMaxPacketIndex = (std::uint64_t{1} << 48) - 1;

/// Keys and counters for one media direction: AES-256 counter mode with an
/// 80-bit HMAC-SHA1 tag, 48-bit packet index (rollover counter || sequence).
class SrtpContext {
 public:
  const Bytes& cipher_key() const noexcept { return cipher_key_; }
  const Bytes& auth_key() const noexcept { return auth_key_; }
  const Bytes& session_salt() const noexcept { return session_salt_; }
  std::uint32_t ssrc() const noexcept { return ssrc_; }
  std::uint64_t next_send_index() const noexcept { return send_index_; }
  // Test hook for counter exhaustion.
  void set_next_send_index(std::uint64_t index) noexcept { send_index_ = index; }

  Bytes protect(ByteView payload, std::uint32_t timestamp);
  Bytes unprotect(ByteView packet);

 private:
  friend SrtpContext srtp_derive(ByteView master_key, ByteView master_salt, std::uint32_t ssrc);

  Bytes keystream_iv(std::uint64_t index) const;
  Bytes compute_tag(ByteView authenticated, std::uint32_t roc) const;
  std::uint64_t estimate_index(std::uint16_t seq) const;

  Bytes cipher_key_;
  Bytes auth_key_;
  Bytes session_salt_;
  std::uint32_t ssrc_ = 0;
  std::uint64_t send_index_ = 0;
  // Receive side: highest authenticated index and a bitmap of the 64 below it.
  bool received_any_ = false;
  std::uint64_t highest_index_ = 0;
  std::uint64_t window_ = 0;
};

SrtpContext srtp_derive(ByteView master_key, ByteView master_salt, std::uint32_t ssrc);

}  // namespace echotb::crypto
