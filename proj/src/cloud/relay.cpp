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

#include "echotb/cloud/relay.hpp"

#include "echotb/error.hpp"

#include <algorithm>

namespace echotb::cloud {

Relay::Relay(netsim::Fabric& fabric, netsim::HostId host) : fabric_(fabric), host_(std::move(host)) {}

netsim::Endpoint Relay::allocate(std::string label) {
  auto address = fabric_.uplink_address(host_);
  if (!address) throw Error(Errc::offline, "relay host has no address");
  std::uint16_t port = next_port_++;
  allocations_[port] = RelayAllocation{std::move(label), port, {}, 0, 0};
  fabric_.bind(host_, port, [this, port](const Bytes& data, const netsim::Endpoint& from,
                                         const netsim::MessageMeta& meta) { on_datagram(port, data, from, meta); });
  fabric_.note(host_, "relay allocated port " + std::to_string(port) + " for " + allocations_[port].label);
  return {*address, port};
}

void Relay::on_datagram(std::uint16_t port, const Bytes& data, const netsim::Endpoint& from,
                        const netsim::MessageMeta& meta) {
  auto& alloc = allocations_.at(port);
  auto known = std::find(alloc.peers.begin(), alloc.peers.end(), from);
  if (data == to_bytes("BIND")) {
    if (known == alloc.peers.end() && alloc.peers.size() < 2) {
      alloc.peers.push_back(from);
      fabric_.note(host_, "relay port " + std::to_string(port) + " peer " + from.str());
    }
    return;
  }
  if (known == alloc.peers.end() || alloc.peers.size() < 2) {
    ++alloc.dropped;
    return;
  }
  netsim::Endpoint to = *known == alloc.peers[0] ? alloc.peers[1] : alloc.peers[0];
  ++alloc.forwarded;
  forwarded_.push_back(data);
  std::string summary = meta.summary + " relayed";
  fabric_.scheduler().after(netsim::kRelayProcessingMs, [this, port, to, data, summary] {
    try {
      fabric_.send_datagram(host_, port, to, data, netsim::Layer::media, summary);
    } catch (const Error&) {
      ++allocations_.at(port).dropped;
    }
  });
}

}  // namespace echotb::cloud
