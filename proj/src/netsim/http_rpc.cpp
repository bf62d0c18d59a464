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

#include "echotb/netsim/http_rpc.hpp"

#include "echotb/error.hpp"

namespace echotb::netsim {

namespace {
struct CallState {
  bool finished = false;
  HttpDone done;
  TimerHandle timer;
  ChannelEnd channel;

  void finish(std::optional<wire::HttpMessage> response, std::string error) {
    if (finished) return;
    finished = true;
    timer.cancel();
    channel.close();
    auto cb = std::move(done);
    cb(std::move(response), std::move(error));
  }
};
}  // namespace

void http_call(Fabric& fabric, const HostId& from, const Endpoint& to, wire::HttpMessage request,
               HttpCallOptions options, HttpDone done) {
  auto state = std::make_shared<CallState>();
  state->done = std::move(done);
  try {
    state->channel = fabric.open_channel(from, to, options.secured, options.sni);
  } catch (const Error& e) {
    std::string why = e.what();
    fabric.scheduler().after(0, [state, why] { state->finish(std::nullopt, why); });
    return;
  }
  state->channel.on_message([state](const Bytes& data, const MessageMeta&) {
    try {
      state->finish(wire::http_parse(data), {});
    } catch (const Error& e) {
      state->finish(std::nullopt, e.what());
    }
  });
  state->channel.on_close([state] { state->finish(std::nullopt, "connection closed"); });
  state->timer = fabric.scheduler().after(options.timeout_ms, [state] { state->finish(std::nullopt, "timeout"); });
  std::string summary = options.summary.empty() ? request.method + " " + request.path : options.summary;
  try {
    state->channel.send(wire::http_serialize(request), options.layer, std::move(summary));
  } catch (const Error& e) {
    std::string why = e.what();
    fabric.scheduler().after(0, [state, why] { state->finish(std::nullopt, why); });
  }
}

void serve_http(Fabric& fabric, const HostId& host, std::uint16_t port, Layer layer, HttpHandler handler) {
  fabric.listen(host, port, [layer, handler](ChannelEnd ch) {
    ch.on_message([layer, handler, ch](const Bytes& data, const MessageMeta&) mutable {
      HttpResponder respond = [ch, layer](wire::HttpMessage response, std::string summary) mutable {
        if (ch.is_open()) ch.send(wire::http_serialize(response), layer, std::move(summary));
      };
      wire::HttpMessage request;
      try {
        request = wire::http_parse(data);
      } catch (const Error& e) {
        respond(wire::make_http_response(400, "Bad Request", to_bytes(e.what()), "text/plain"), "400 bad request");
        return;
      }
      handler(request, ch, respond);
    });
  });
}

}  // namespace echotb::netsim
