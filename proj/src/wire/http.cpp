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

#include "echotb/wire/http.hpp"

#include "echotb/error.hpp"
#include "message_text.hpp"

#include <charconv>

namespace echotb::wire {

namespace {
constexpr std::string_view kVersion = "HTTP/1.1";

bool is_token(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c <= ' ' || c >= 127) return false;
  return true;
}
}  // namespace

HttpMessage http_parse(ByteView bytes) {
  auto split = detail::split_message(bytes);
  HttpMessage msg;
  auto parts = detail::split_spaces(split.start_line, 3);
  if (parts.size() != 3) throw Error(Errc::malformed, "start line '" + split.start_line + "'");
  if (parts[0] == kVersion) {
    msg.kind = HttpMessage::Kind::response;
    int status = 0;
    auto [ptr, ec] = std::from_chars(parts[1].data(), parts[1].data() + parts[1].size(), status);
    if (parts[1].size() != 3 || ec != std::errc() || ptr != parts[1].data() + 3 || status < 100)
      throw Error(Errc::malformed, "status code");
    msg.status = status;
    msg.reason = std::string(parts[2]);
  } else {
    if (parts[2] != kVersion) throw Error(Errc::malformed, "unsupported HTTP version");
    if (!is_token(parts[0]) || parts[1].empty() || parts[1].front() != '/')
      throw Error(Errc::malformed, "request line");
    msg.kind = HttpMessage::Kind::request;
    msg.method = std::string(parts[0]);
    msg.path = std::string(parts[1]);
  }
  msg.headers = std::move(split.headers);
  if (auto te = msg.headers.get("Transfer-Encoding"))
    throw Error(Errc::unsupported, "Transfer-Encoding " + *te);
  if (msg.headers.get_all("Content-Length").size() > 1)
    throw Error(Errc::malformed, "repeated Content-Length");
  msg.body = detail::take_body(msg.headers, split.rest);
  return msg;
}

Bytes http_serialize(const HttpMessage& msg) {
  std::string out;
  if (msg.is_request()) {
    if (!is_token(msg.method) || msg.path.empty() || msg.path.front() != '/' ||
        msg.path.find_first_of(" \r\n") != std::string::npos)
      throw Error(Errc::malformed, "request line");
    out = msg.method + " " + msg.path + " " + std::string(kVersion) + "\r\n";
  } else {
    if (msg.status < 100 || msg.status > 999 || msg.reason.find_first_of("\r\n") != std::string::npos)
      throw Error(Errc::malformed, "status line");
    out = std::string(kVersion) + " " + std::to_string(msg.status) + " " + msg.reason + "\r\n";
  }
  detail::write_headers(out, msg.headers, msg.body.size());
  Bytes bytes = to_bytes(out);
  append(bytes, msg.body);
  return bytes;
}

HttpMessage make_http_request(std::string method, std::string path, Bytes body,
                              std::string content_type) {
  HttpMessage m;
  m.kind = HttpMessage::Kind::request;
  m.method = std::move(method);
  m.path = std::move(path);
  if (!body.empty()) m.headers.add("Content-Type", std::move(content_type));
  m.headers.add("Content-Length", std::to_string(body.size()));
  m.body = std::move(body);
  return m;
}

HttpMessage make_http_response(int status, std::string reason, Bytes body,
                               std::string content_type) {
  HttpMessage m;
  m.kind = HttpMessage::Kind::response;
  m.status = status;
  m.reason = std::move(reason);
  if (!body.empty()) m.headers.add("Content-Type", std::move(content_type));
  m.headers.add("Content-Length", std::to_string(body.size()));
  m.body = std::move(body);
  return m;
}

}  // namespace echotb::wire
