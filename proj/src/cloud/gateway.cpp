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

#include "echotb/cloud/gateway.hpp"

#include "echotb/calling/signaling.hpp"
#include "echotb/cloud/endpoints.hpp"
#include "echotb/error.hpp"
#include "echotb/wire/sdp.hpp"
#include "echotb/wire/sip.hpp"

namespace echotb::cloud {

GatewayStub::GatewayStub(netsim::Fabric& fabric, netsim::HostId host, crypto::SeededRng rng)
    : fabric_(fabric), host_(std::move(host)), rng_(std::move(rng)) {
  fabric_.listen(host_, kGatewayPort, [this](netsim::ChannelEnd ch) {
    ch.on_message([this, ch](const Bytes& data, const netsim::MessageMeta&) { on_message(ch, data); });
  });
}

std::size_t GatewayStub::frames_received() const {
  std::size_t n = 0;
  for (const auto& [id, s] : sessions_) n += s->stats().received;
  return n;
}

const calling::MediaSession* GatewayStub::session(const std::string& call_id) const {
  auto it = sessions_.find(call_id);
  return it == sessions_.end() ? nullptr : it->second.get();
}

void GatewayStub::on_message(netsim::ChannelEnd channel, const Bytes& data) {
  wire::SipMessage msg;
  try {
    msg = wire::sip_parse(data);
  } catch (const Error&) {
    return;
  }
  if (!msg.is_request()) return;
  std::string call_id = msg.call_id();
  if (msg.method == "INVITE") {
    wire::SdpBody offer;
    try {
      offer = wire::sdp_decode(msg.body);
    } catch (const Error&) {
      calling::send_sip(channel, wire::make_sip_response(msg, 403));
      return;
    }
    auto address = fabric_.uplink_address(host_);
    std::uint16_t port = next_port_++;
    wire::SdpBody answer;
    answer.session_id = rng_.next_u64();
    answer.media_port = port;
    answer.candidates.push_back({wire::Candidate::Type::host, address.value_or(""), port});
    answer.crypto.key_salt = rng_.bytes(wire::kSdesKeyLen + wire::kSdesSaltLen);
    sessions_[call_id] = std::make_unique<calling::MediaSession>(
        fabric_, host_, port, answer, offer, calling::select_path(fabric_, host_, offer, true));
    auto ok = wire::make_sip_response(msg, 200, calling::random_token(rng_));
    ok.headers.set(calling::kCallTypeHeader, "gateway");
    ok.headers.set("Content-Type", "application/sdp");
    ok.body = wire::sdp_encode(answer);
    ++answered_;
    calling::send_sip(channel, ok, "gateway answer");
  } else if (msg.method == "BYE") {
    if (auto it = sessions_.find(call_id); it != sessions_.end()) it->second->stop();
    calling::send_sip(channel, wire::make_sip_response(msg, 200));
  } else if (msg.method == "CANCEL") {
    calling::send_sip(channel, wire::make_sip_response(msg, 200));
  }
}

}  // namespace echotb::cloud
