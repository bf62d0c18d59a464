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
#include "echotb/wire/headers.hpp"

#include <string>

namespace echotb::wire {

/// HTTP/1.1 subset: Content-Length framing only, no chunked bodies.
struct HttpMessage {
  enum class Kind { request, response };

  Kind kind = Kind::request;
  std::string method;  // requests
  std::string path;    // requests
  int status = 0;      // responses
  std::string reason;  // responses
  HeaderList headers;
  Bytes body;

  bool is_request() const noexcept { return kind == Kind::request; }
  std::string body_text() const { return to_string(body); }
  bool operator==(const HttpMessage&) const = default;
};

HttpMessage http_parse(ByteView bytes);
Bytes http_serialize(const HttpMessage& msg);

HttpMessage make_http_request(std::string method, std::string path, Bytes body,
                              std::string content_type = "application/json");
HttpMessage make_http_response(int status, std::string reason, Bytes body,
                               std::string content_type = "application/json");

}  // namespace echotb::wire
