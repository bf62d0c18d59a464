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

#include "echotb/netsim/fabric.hpp"
#include "echotb/wire/http.hpp"

#include <functional>
#include <optional>
#include <string>

namespace echotb::netsim {

struct HttpCallOptions {
  bool secured = false;
  std::string sni;
  Layer layer = Layer::http;
  std::string summary;
  std::uint64_t timeout_ms = 10'000;
};

// Exactly one of response / error is set.
using HttpDone = std::function<void(std::optional<wire::HttpMessage> response, std::string error)>;

// One request, one response, then the channel is closed. Always completes
// asynchronously, including on connect failure.
void http_call(Fabric& fabric, const HostId& from, const Endpoint& to, wire::HttpMessage request,
               HttpCallOptions options, HttpDone done);

using HttpResponder = std::function<void(wire::HttpMessage response, std::string summary)>;
using HttpHandler =
    std::function<void(const wire::HttpMessage& request, const ChannelEnd& channel, HttpResponder respond)>;

// Each inbound message on an accepted channel is one request. Unparseable
// requests get a 400 without reaching the handler.
void serve_http(Fabric& fabric, const HostId& host, std::uint16_t port, Layer layer, HttpHandler handler);

}  // namespace echotb::netsim
