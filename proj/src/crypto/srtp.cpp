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

#include "echotb/crypto/srtp.hpp"

#include "echotb/crypto/primitives.hpp"
#include "echotb/error.hpp"

namespace echotb::crypto {

namespace {
constexpr std::size_t kAuthKeyLen = 20;

Bytes labelled(ByteView master_key, std::uint8_t label, ByteView salt, std::size_t len) {
  Bytes input{label};
  append(input, salt);
  Bytes out = hmac_sha256(master_key, input);
  out.resize(len);
  return out;
}
}  // namespace

SrtpContext srtp_derive(ByteView master_key, ByteView master_salt, std::uint32_t ssrc) {
  if (master_key.size() != kSrtpMasterKeyLen) throw Error(Errc::wrong_length, "sRTP master key must be 32 bytes");
  if (master_salt.size() != kSrtpMasterSaltLen) throw Error(Errc::wrong_length, "sRTP master salt must be 14 bytes");
  SrtpContext ctx;
  ctx.cipher_key_ = labelled(master_key, 0x00, master_salt, kAesKeyLen);
  ctx.auth_key_ = labelled(master_key, 0x01, master_salt, kAuthKeyLen);
  ctx.session_salt_ = labelled(master_key, 0x02, master_salt, kSrtpMasterSaltLen);
  ctx.ssrc_ = ssrc;
  return ctx;
}

Bytes SrtpContext::keystream_iv(std::uint64_t index) const {
  // (salt << 16) XOR (ssrc << 64) XOR (index << 16)
  Bytes iv(kAesBlock, 0);
  std::copy(session_salt_.begin(), session_salt_.end(), iv.begin());
  for (int i = 0; i < 4; ++i) iv[4 + i] ^= static_cast<std::uint8_t>(ssrc_ >> (24 - 8 * i));
  for (int i = 0; i < 6; ++i) iv[8 + i] ^= static_cast<std::uint8_t>(index >> (40 - 8 * i));
  return iv;
}

Bytes SrtpContext::compute_tag(ByteView authenticated, std::uint32_t roc) const {
  Bytes input(authenticated.begin(), authenticated.end());
  put_u32(input, roc);
  Bytes tag = hmac_sha1(auth_key_, input);
  tag.resize(kSrtpTagLen);
  return tag;
}

Bytes SrtpContext::protect(ByteView payload, std::uint32_t timestamp) {
  if (payload.empty()) throw Error(Errc::invalid_argument, "empty media payload");
  if (send_index_ > kMaxPacketIndex) throw Error(Errc::counter_exhausted, "sRTP packet index would wrap");
  const std::uint64_t index = send_index_++;
  Bytes packet{0x80, 0x60};
  put_u16(packet, static_cast<std::uint16_t>(index & 0xffff));
  put_u32(packet, timestamp);
  put_u32(packet, ssrc_);
  append(packet, aes256_ctr(cipher_key_, keystream_iv(index), payload));
  append(packet, compute_tag(packet, static_cast<std::uint32_t>(index >> 16)));
  return packet;
}

std::uint64_t SrtpContext::estimate_index(std::uint16_t seq) const {
  if (!received_any_) return seq;
  const std::uint64_t roc = highest_index_ >> 16;
  const std::uint32_t s_l = highest_index_ & 0xffff;
  std::uint64_t v = roc;
  if (s_l < 0x8000) {
    if (seq > s_l && seq - s_l > 0x8000 && roc > 0) v = roc - 1;
  } else if (s_l - 0x8000 > seq) {
    v = roc + 1;
  }
  return v << 16 | seq;
}

Bytes SrtpContext::unprotect(ByteView packet) {
  if (packet.size() < kSrtpHeaderLen + kSrtpTagLen + 1) throw Error(Errc::truncated, "sRTP packet");
  if (get_u32(packet, 8) != ssrc_) throw Error(Errc::unknown_ssrc, std::to_string(get_u32(packet, 8)));
  const std::uint64_t index = estimate_index(get_u16(packet, 2));

  if (received_any_ && index <= highest_index_) {
    const std::uint64_t delta = highest_index_ - index;
    if (delta >= kReplayWindow || (window_ >> delta) & 1) throw Error(Errc::replay, "index " + std::to_string(index));
  }

  auto authenticated = packet.first(packet.size() - kSrtpTagLen);
  if (!constant_time_equal(compute_tag(authenticated, static_cast<std::uint32_t>(index >> 16)),
                           packet.last(kSrtpTagLen)))
    throw Error(Errc::auth_failed, "sRTP tag");

  Bytes payload = aes256_ctr(cipher_key_, keystream_iv(index), authenticated.subspan(kSrtpHeaderLen));

  if (!received_any_) {
    highest_index_ = index;
    window_ = 1;
    received_any_ = true;
  } else if (index > highest_index_) {
    const std::uint64_t shift = index - highest_index_;
    window_ = shift >= kReplayWindow ? 1 : (window_ << shift) | 1;
    highest_index_ = index;
  } else {
    window_ |= std::uint64_t{1} << (highest_index_ - index);
  }
  return payload;
}

}  // namespace echotb::crypto
