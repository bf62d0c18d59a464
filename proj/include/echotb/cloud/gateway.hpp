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

#include "echotb/calling/media.hpp"
#include "echotb/crypto/rng.hpp"
#include "echotb/netsim/fabric.hpp"

#include <map>
#include <memory>
#include <string>

namespace echotb::cloud {

/// PSTN/Skype terminating stub: answers every INVITE, sinks the media.
class GatewayStub {
 public:
  GatewayStub(netsim::Fabric& fabric, netsim::HostId host, crypto::SeededRng rng);

  std::size_t answered() const noexcept { return answered_; }
  std::size_t frames_received() const;
  const calling::MediaSession* session(const std::string& call_id) const;

 private:
  void on_message(netsim::ChannelEnd channel, const Bytes& data);

  netsim::Fabric& fabric_;
  netsim::HostId host_;
  crypto::SeededRng rng_;
  std::uint16_t next_port_ = 30000;
  std::size_t answered_ = 0;
  std::map<std::string, std::unique_ptr<calling::MediaSession>> sessions_;
};

}  // namespace echotb::cloud
