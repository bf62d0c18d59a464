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

#include <map>
#include <string>
#include <vector>

namespace echotb::cloud {

inline constexpr std::uint16_t kRelayFirstPort = 50000;

struct RelayAllocation {
  std::string label;
  std::uint16_t port = 0;
  std::vector<netsim::Endpoint> peers;  // learned from BIND, at most two
  std::size_t forwarded = 0;
  std::size_t dropped = 0;
};

/// Media relay: pairs the first two peers that BIND to an allocation and
/// forwards everything else between them byte for byte. Holds no keys.
class Relay {
 public:
  Relay(netsim::Fabric& fabric, netsim::HostId host);

  netsim::Endpoint allocate(std::string label);
  const std::map<std::uint16_t, RelayAllocation>& allocations() const noexcept { return allocations_; }
  // Every packet forwarded, in order.
  const std::vector<Bytes>& forwarded() const noexcept { return forwarded_; }
  const netsim::HostId& host() const noexcept { return host_; }

 private:
  void on_datagram(std::uint16_t port, const Bytes& data, const netsim::Endpoint& from,
                   const netsim::MessageMeta& meta);

  netsim::Fabric& fabric_;
  netsim::HostId host_;
  std::uint16_t next_port_ = kRelayFirstPort;
  std::map<std::uint16_t, RelayAllocation> allocations_;
  std::vector<Bytes> forwarded_;
};

}  // namespace echotb::cloud
