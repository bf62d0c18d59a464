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

#include "echotb/bytes.hpp"
#include "echotb/error.hpp"

#include <algorithm>
#include <cctype>

#include <openssl/evp.h>

namespace echotb {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::malformed: return "malformed";
    case Errc::missing_header: return "missing mandatory header";
    case Errc::length_mismatch: return "body length mismatch";
    case Errc::injection: return "header injection";
    case Errc::wrong_path: return "wrong path";
    case Errc::unsupported: return "unsupported";
    case Errc::wrong_length: return "wrong length";
    case Errc::unwrap_failed: return "unwrap failed";
    case Errc::bad_padding: return "bad padding";
    case Errc::truncated: return "truncated";
    case Errc::auth_failed: return "auth";
    case Errc::replay: return "replay";
    case Errc::unknown_ssrc: return "unknown ssrc";
    case Errc::counter_exhausted: return "counter exhausted";
    case Errc::bad_certificate: return "bad certificate";
    case Errc::unreachable: return "unreachable";
    case Errc::refused: return "refused";
    case Errc::prefix_collision: return "prefix collision";
    case Errc::already_attached: return "already attached";
    case Errc::not_on_lan: return "observer not on lan";
    case Errc::wrong_ssid: return "wrong ssid";
    case Errc::torn_down: return "torn down";
    case Errc::budget_exceeded: return "event budget exceeded";
    case Errc::invalid_state: return "invalid state";
    case Errc::offline: return "offline";
    case Errc::unauthorized: return "unauthorized";
    case Errc::already_registered: return "already registered";
    case Errc::dead_code: return "dead code";
    case Errc::bad_cookie: return "bad cookie";
    case Errc::unknown_call: return "unknown call";
    case Errc::busy: return "busy";
    case Errc::not_found: return "not found";
    case Errc::forbidden: return "forbidden";
    case Errc::invalid_argument: return "invalid argument";
    case Errc::timeout: return "timeout";
  }
  return "unknown";
}

std::string base64_encode(ByteView data) {
  std::string out(4 * ((data.size() + 2) / 3), '\0');
  int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), data.data(),
                          static_cast<int>(data.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

Bytes base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw Error(Errc::malformed, "base64 length");
  // EVP_DecodeBlock tolerates stray whitespace; the wire formats here do not.
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '/' ||
              (c == '=' && i + 2 >= text.size());
    if (!ok) throw Error(Errc::malformed, "base64 alphabet");
  }
  std::size_t pad = 0;
  if (!text.empty() && text.back() == '=') ++pad;
  if (text.size() > 1 && text[text.size() - 2] == '=') {
    if (text.back() != '=') throw Error(Errc::malformed, "base64 padding");
    ++pad;
  }
  Bytes out(text.size() / 4 * 3);
  int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                          static_cast<int>(text.size()));
  if (n < 0) throw Error(Errc::malformed, "base64");
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

std::string hex_encode(ByteView data) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) {
    out += kHex[b >> 4];
    out += kHex[b & 15];
  }
  return out;
}

Bytes hex_decode(std::string_view text) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (text.size() % 2) throw Error(Errc::malformed, "hex length");
  Bytes out;
  for (std::size_t i = 0; i < text.size(); i += 2) {
    int hi = nibble(text[i]), lo = nibble(text[i + 1]);
    if (hi < 0 || lo < 0) throw Error(Errc::malformed, "hex digit");
    out.push_back(static_cast<std::uint8_t>(hi << 4 | lo));
  }
  return out;
}

bool contains(ByteView haystack, ByteView needle) {
  if (needle.empty()) return true;
  return std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end()) !=
         haystack.end();
}

void put_u16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_u32(Bytes& out, std::uint32_t v) {
  put_u16(out, static_cast<std::uint16_t>(v >> 16));
  put_u16(out, static_cast<std::uint16_t>(v));
}

void put_u64(Bytes& out, std::uint64_t v) {
  put_u32(out, static_cast<std::uint32_t>(v >> 32));
  put_u32(out, static_cast<std::uint32_t>(v));
}

std::uint16_t get_u16(ByteView in, std::size_t at) {
  if (at + 2 > in.size()) throw Error(Errc::truncated, "u16 read");
  return static_cast<std::uint16_t>(in[at] << 8 | in[at + 1]);
}

std::uint32_t get_u32(ByteView in, std::size_t at) {
  return static_cast<std::uint32_t>(get_u16(in, at)) << 16 | get_u16(in, at + 2);
}

}  // namespace echotb
