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

// Line-oriented framing shared by the HTTP and SIP parsers.

#include "echotb/bytes.hpp"
#include "echotb/error.hpp"
#include "echotb/wire/headers.hpp"

#include <charconv>
#include <string>
#include <string_view>
#include <vector>

namespace echotb::wire::detail {

struct SplitMessage {
  std::string start_line;
  HeaderList headers;
  ByteView rest;
};

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline SplitMessage split_message(ByteView bytes) {
  std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  auto head_end = text.find("\r\n\r\n");
  if (head_end == std::string_view::npos) throw Error(Errc::malformed, "no end of headers");
  SplitMessage out;
  std::string_view head = text.substr(0, head_end + 2);
  bool first = true;
  while (!head.empty()) {
    auto eol = head.find("\r\n");
    std::string_view line = head.substr(0, eol);
    head.remove_prefix(eol + 2);
    if (line.find('\n') != std::string_view::npos || line.find('\r') != std::string_view::npos)
      throw Error(Errc::malformed, "bare CR or LF");
    if (first) {
      if (line.empty()) throw Error(Errc::malformed, "empty start line");
      out.start_line = std::string(line);
      first = false;
      continue;
    }
    auto colon = line.find(':');
    if (colon == std::string_view::npos || colon == 0)
      throw Error(Errc::malformed, "header line without name");
    std::string_view name = line.substr(0, colon);
    if (name.find_first_of(" \t") != std::string_view::npos)
      throw Error(Errc::malformed, "whitespace in header name");
    out.headers.add(std::string(name), std::string(trim(line.substr(colon + 1))));
  }
  out.rest = bytes.subspan(head_end + 4);
  return out;
}

inline std::vector<std::string_view> split_spaces(std::string_view line, std::size_t max_parts) {
  std::vector<std::string_view> parts;
  while (parts.size() + 1 < max_parts) {
    auto sp = line.find(' ');
    if (sp == std::string_view::npos) break;
    parts.push_back(line.substr(0, sp));
    line.remove_prefix(sp + 1);
  }
  parts.push_back(line);
  return parts;
}

inline std::size_t parse_length(std::string_view value) {
  std::size_t n = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), n);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size())
    throw Error(Errc::malformed, "non-numeric Content-Length '" + std::string(value) + "'");
  return n;
}

// Enforces Content-Length framing on the bytes following the header block.
inline Bytes take_body(const HeaderList& headers, ByteView rest) {
  auto len = headers.get("Content-Length");
  if (!len) {
    if (!rest.empty()) throw Error(Errc::length_mismatch, "body without Content-Length");
    return {};
  }
  std::size_t n = parse_length(*len);
  if (rest.size() < n) throw Error(Errc::truncated, "body shorter than Content-Length");
  if (rest.size() > n) throw Error(Errc::length_mismatch, "trailing bytes after body");
  return Bytes(rest.begin(), rest.end());
}

inline void write_headers(std::string& out, const HeaderList& headers, std::size_t body_len) {
  bool wrote_length = false;
  for (const auto& h : headers.items()) {
    check_header_safe(h);
    if (iequals(h.name, "Content-Length")) {
      if (wrote_length) continue;
      out += h.name + ": " + std::to_string(body_len) + "\r\n";
      wrote_length = true;
      continue;
    }
    out += h.name + ": " + h.value + "\r\n";
  }
  if (!wrote_length) out += "Content-Length: " + std::to_string(body_len) + "\r\n";
  out += "\r\n";
}

}  // namespace echotb::wire::detail
