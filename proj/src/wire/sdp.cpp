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

#include "echotb/wire/sdp.hpp"

#include "echotb/error.hpp"

#include <charconv>
#include <sstream>
#include <string>

namespace echotb::wire {

namespace {

template <typename T>
T parse_number(std::string_view s, const char* what) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw Error(Errc::malformed, std::string("SDP ") + what);
  return v;
}

std::vector<std::string_view> words(std::string_view s) {
  std::vector<std::string_view> out;
  while (!s.empty()) {
    auto sp = s.find(' ');
    if (sp != 0) out.push_back(s.substr(0, sp));
    if (sp == std::string_view::npos) break;
    s.remove_prefix(sp + 1);
  }
  return out;
}

void check_crypto(const SdesCrypto& c) {
  if (c.key_salt.size() != kSdesKeyLen + kSdesSaltLen)
    throw Error(Errc::wrong_length, "SDES key material is " + std::to_string(c.key_salt.size()) + " bytes");
  if (c.suite.empty() || c.suite.find_first_of(" \r\n") != std::string::npos)
    throw Error(Errc::malformed, "SDES suite tag");
}

}  // namespace

Bytes sdp_encode(const SdpBody& body) {
  check_crypto(body.crypto);
  if (body.candidates.empty()) throw Error(Errc::invalid_argument, "SDP needs at least one candidate");
  std::string out;
  const auto& first = body.candidates.front();
  out += "v=0\r\n";
  out += "o=- " + std::to_string(body.session_id) + " 1 IN IP4 " + first.address + "\r\n";
  out += "s=-\r\n";
  out += "c=IN IP4 " + first.address + "\r\n";
  out += "t=0 0\r\n";
  out += "m=audio " + std::to_string(body.media_port) + " RTP/SAVP 96\r\n";
  out += "a=rtpmap:96 opus/48000/2\r\n";
  out += "a=crypto:1 " + body.crypto.suite + " inline:" + base64_encode(body.crypto.key_salt) + "\r\n";
  int foundation = 1;
  for (const auto& c : body.candidates) {
    if (c.address.empty() || c.address.find_first_of(" \r\n") != std::string::npos)
      throw Error(Errc::malformed, "candidate address");
    bool host = c.type == Candidate::Type::host;
    out += "a=candidate:" + std::to_string(foundation++) + " 1 UDP " + (host ? "2130706431" : "16777215") + " " +
           c.address + " " + std::to_string(c.port) + " typ " + (host ? "host" : "relay") + "\r\n";
  }
  return to_bytes(out);
}

SdpBody sdp_decode(ByteView bytes) {
  std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  SdpBody body;
  bool have_origin = false, have_media = false;
  int crypto_lines = 0;
  while (!text.empty()) {
    auto eol = text.find("\r\n");
    if (eol == std::string_view::npos) throw Error(Errc::malformed, "SDP line not CRLF-terminated");
    std::string_view line = text.substr(0, eol);
    text.remove_prefix(eol + 2);
    if (line.size() < 2 || line[1] != '=') throw Error(Errc::malformed, "SDP line '" + std::string(line) + "'");
    std::string_view value = line.substr(2);
    switch (line[0]) {
      case 'o': {
        auto w = words(value);
        if (w.size() != 6) throw Error(Errc::malformed, "SDP origin");
        body.session_id = parse_number<std::uint64_t>(w[1], "session id");
        have_origin = true;
        break;
      }
      case 'm': {
        auto w = words(value);
        if (w.size() < 4 || w[0] != "audio") throw Error(Errc::malformed, "SDP media line");
        if (have_media) throw Error(Errc::unsupported, "multiple media sections");
        body.media_port = parse_number<std::uint16_t>(w[1], "media port");
        have_media = true;
        break;
      }
      case 'a': {
        if (value.starts_with("crypto:")) {
          auto w = words(value.substr(7));
          if (w.size() != 3 || !w[2].starts_with("inline:")) throw Error(Errc::malformed, "SDP crypto line");
          body.crypto.suite = std::string(w[1]);
          body.crypto.key_salt = base64_decode(w[2].substr(7));
          ++crypto_lines;
        } else if (value.starts_with("candidate:")) {
          auto w = words(value.substr(10));
          if (w.size() != 8 || w[6] != "typ") throw Error(Errc::malformed, "SDP candidate line");
          Candidate c;
          c.address = std::string(w[4]);
          c.port = parse_number<std::uint16_t>(w[5], "candidate port");
          if (w[7] == "host") c.type = Candidate::Type::host;
          else if (w[7] == "relay") c.type = Candidate::Type::relay;
          else throw Error(Errc::unsupported, "candidate type " + std::string(w[7]));
          body.candidates.push_back(std::move(c));
        }
        break;
      }
      default:
        break;
    }
  }
  if (!have_origin || !have_media) throw Error(Errc::malformed, "SDP missing origin or media");
  if (crypto_lines != 1) throw Error(Errc::malformed, "SDP needs exactly one crypto line");
  if (body.candidates.empty()) throw Error(Errc::malformed, "SDP has zero candidates");
  check_crypto(body.crypto);
  return body;
}

}  // namespace echotb::wire
