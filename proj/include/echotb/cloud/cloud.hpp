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

#include "echotb/cloud/endpoints.hpp"
#include "echotb/cloud/gateway.hpp"
#include "echotb/cloud/registrar.hpp"
#include "echotb/cloud/relay.hpp"
#include "echotb/cloud/services.hpp"
#include "echotb/netsim/fabric.hpp"
#include "echotb/wire/control.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace echotb::cloud {

struct CloudOptions {
  netsim::LanId lan = "cloud";
  std::string prefix = "203.0.113";
};

struct CloudHosts {
  netsim::HostId api = "cloud-api";
  netsim::HostId avs = "cloud-avs";
  netsim::HostId sip = "cloud-sip";
  netsim::HostId turn = "cloud-turn";
  netsim::HostId pstn = "cloud-pstn";
};

struct AvsEvent {
  std::uint64_t t_ms = 0;
  std::string serial;
  wire::ControlMessage message;
};

// Refresh directives pushed after a NegotiationCommand is accepted.
inline const std::vector<std::string> kRefreshSubsystems = {"Alerts", "Settings", "Notifications", "SipClient"};

/// The mock cloud: one LAN of public hosts behind the well-known hostnames.
class Cloud {
 public:
  Cloud(netsim::Fabric& fabric, crypto::SeededRng rng, CloudOptions options = {});
  Cloud(const Cloud&) = delete;
  Cloud& operator=(const Cloud&) = delete;

  AccountService& accounts() noexcept { return accounts_; }
  const AccountService& accounts() const noexcept { return accounts_; }
  Registrar& registrar() noexcept { return *registrar_; }
  Relay& relay() noexcept { return *relay_; }
  GatewayStub& gateway() noexcept { return *gateway_; }
  const CloudHosts& hosts() const noexcept { return hosts_; }
  const netsim::LanId& lan() const noexcept { return options_.lan; }

  // ---- AVS
  bool avs_session_up(const std::string& serial) const;
  void send_directive(const std::string& serial, const wire::ControlMessage& message);
  const std::vector<AvsEvent>& events() const noexcept { return events_; }
  std::size_t avs_accepts() const noexcept { return avs_accepts_; }
  const std::vector<std::string>& avs_rejections() const noexcept { return avs_rejections_; }
  std::size_t refresh_acks(const std::string& serial) const;

  // ---- orchestration (the Alexa side of a call)
  struct CallRequest {
    std::string caller_serial;
    std::string callee_uri;
    crypto::CallType type = crypto::CallType::regular;
    // Re-use a previously minted token instead of minting one.
    std::optional<crypto::CallAuthToken> token;
    // Mint the token for this callee URI instead (binding probe).
    std::optional<std::string> token_callee;
  };
  crypto::CallAuthToken begin_call(const CallRequest& request);
  void accept_call(const std::string& serial);
  void end_call(const std::string& serial);

  // ---- account administration
  void deregister(const std::string& serial);

 private:
  struct AvsSession {
    netsim::ChannelEnd channel;
    bool authenticated = false;
    std::string serial;
    std::string account;
  };

  void serve_api();
  void serve_avs();
  void on_avs_message(netsim::ChannelEnd channel, const Bytes& data);
  void send_control(netsim::ChannelEnd& channel, const wire::ControlMessage& message);

  netsim::Fabric& fabric_;
  CloudOptions options_;
  CloudHosts hosts_;
  AccountService accounts_;
  std::unique_ptr<Registrar> registrar_;
  std::unique_ptr<Relay> relay_;
  std::unique_ptr<GatewayStub> gateway_;
  std::map<std::uint64_t, AvsSession> avs_sessions_;        // by channel id
  std::map<std::string, std::uint64_t> avs_by_serial_;
  std::map<std::string, std::size_t> refresh_acks_;
  std::vector<AvsEvent> events_;
  std::size_t avs_accepts_ = 0;
  std::vector<std::string> avs_rejections_;
};

}  // namespace echotb::cloud
