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

#include "echotb/calling/media.hpp"

#include "echotb/error.hpp"

#include <cstdio>

namespace echotb::calling {

std::string_view to_string(PathKind p) noexcept {
  switch (p) {
    case PathKind::direct: return "direct";
    case PathKind::relay: return "relay";
    case PathKind::gateway: return "gateway";
  }
  return "relay";
}

std::uint32_t ssrc_of(const wire::SdpBody& sdp) noexcept { return static_cast<std::uint32_t>(sdp.session_id); }

Bytes canary_frame(const std::string& owner, std::size_t index) {
  std::string text = "media-canary-" + owner + "-" + std::to_string(index) + "-";
  Bytes out = to_bytes(text);
  out.resize(kFrameBytes, static_cast<std::uint8_t>('.'));
  return out;
}

PathChoice select_path(const netsim::Fabric& fabric, const netsim::HostId& host, const wire::SdpBody& remote,
                       bool gateway_leg) {
  const wire::Candidate* relay = nullptr;
  for (const auto& c : remote.candidates) {
    if (c.type == wire::Candidate::Type::host) {
      if (gateway_leg) return {PathKind::gateway, {c.address, c.port}};
      if (fabric.reachable(host, c.address)) return {PathKind::direct, {c.address, c.port}};
    } else if (!relay) {
      relay = &c;
    }
  }
  if (!relay) throw Error(Errc::unreachable, "no usable media candidate");
  return {PathKind::relay, {relay->address, relay->port}};
}

MediaSession::MediaSession(netsim::Fabric& fabric, netsim::HostId host, std::uint16_t local_port,
                           const wire::SdpBody& local, const wire::SdpBody& remote, PathChoice path)
    : fabric_(fabric),
      host_(std::move(host)),
      port_(local_port),
      path_(std::move(path)),
      send_(crypto::srtp_derive(ByteView(local.crypto.key_salt).first(wire::kSdesKeyLen),
                                ByteView(local.crypto.key_salt).subspan(wire::kSdesKeyLen), ssrc_of(local))),
      recv_(crypto::srtp_derive(ByteView(remote.crypto.key_salt).first(wire::kSdesKeyLen),
                                ByteView(remote.crypto.key_salt).subspan(wire::kSdesKeyLen), ssrc_of(remote))) {
  fabric_.bind(host_, port_, [this](const Bytes& data, const netsim::Endpoint&, const netsim::MessageMeta&) {
    on_datagram(data);
  });
  if (path_.kind == PathKind::relay) {
    // Relay learns our address from this; it also opens our NAT towards it.
    fabric_.send_datagram(host_, port_, path_.target, to_bytes("BIND"), netsim::Layer::media, "relay bind");
  }
}

MediaSession::~MediaSession() { stop(); }

void MediaSession::send_frame(ByteView payload) {
  if (!active_) throw Error(Errc::torn_down, "media session stopped");
  Bytes packet = send_.protect(payload, timestamp_);
  timestamp_ += static_cast<std::uint32_t>(kFrameBytes);
  char summary[64];
  std::snprintf(summary, sizeof summary, "srtp ssrc=%08x seq=%zu %s", send_.ssrc(), stats_.sent,
                std::string(to_string(path_.kind)).c_str());
  sent_packets_.push_back(packet);
  ++stats_.sent;
  fabric_.send_datagram(host_, port_, path_.target, std::move(packet), netsim::Layer::media, summary);
}

void MediaSession::resend_last() {
  if (!active_ || sent_packets_.empty()) throw Error(Errc::invalid_state, "nothing to resend");
  fabric_.send_datagram(host_, port_, path_.target, sent_packets_.back(), netsim::Layer::media, "srtp duplicate");
}

void MediaSession::stop() {
  if (!active_) return;
  active_ = false;
  fabric_.unbind(host_, port_);
}

void MediaSession::on_datagram(const Bytes& data) {
  if (!active_) return;
  try {
    received_.push_back(recv_.unprotect(data));
    ++stats_.received;
  } catch (const Error& e) {
    if (e.code() == Errc::auth_failed) {
      ++stats_.auth_drops;
    } else if (e.code() == Errc::replay) {
      ++stats_.replay_drops;
    } else {
      ++stats_.other_drops;
    }
  }
}

}  // namespace echotb::calling
