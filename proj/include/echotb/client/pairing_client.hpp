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

#include "echotb/crypto/credential.hpp"
#include "echotb/crypto/keys.hpp"
#include "echotb/crypto/rng.hpp"
#include "echotb/netsim/fabric.hpp"
#include "echotb/wire/oobe.hpp"

#include <json.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace echotb::client {

enum class SessionState { idle, discovering, inspecting, provisioning, linking, registering, awaiting, done, failed };

using echotb::to_string;
std::string_view to_string(SessionState s) noexcept;

inline constexpr std::uint64_t kDiscoverTimeoutMs = 5000;
inline constexpr std::uint64_t kRegistrationTimeoutMs = 60000;
inline constexpr std::uint64_t kRegistrationPollMs = 1000;

struct DeviceDetails {
  std::string device_type;
  std::string serial;
  std::string wifi_mac;
  std::string locale;
  std::string software_version;
  crypto::DeviceCertificate certificate;
};

struct PairingRequest {
  std::string ssid;  // pairing network to join
  crypto::WifiCredential wifi;
  std::vector<std::string> candidates;  // empty = the well-known set
};

using OobeDone = std::function<void(std::optional<wire::OobeEnvelope>, std::string error)>;

// Sends one OOBE call over plain HTTP to address:8080.
void oobe_call(netsim::Fabric& fabric, const netsim::HostId& from, const std::string& address, wire::OobeEnvelope env,
               OobeDone done);

/// Phone-app stand-in. One pairing session per instance.
class PairingClient {
 public:
  using Done = std::function<void(const PairingClient&)>;

  PairingClient(netsim::Fabric& fabric, netsim::HostId host, crypto::SeededRng rng);
  ~PairingClient();
  PairingClient(const PairingClient&) = delete;
  PairingClient& operator=(const PairingClient&) = delete;

  const netsim::HostId& host() const noexcept { return host_; }
  // Obtains the account cookie over the client's own uplink.
  void login(const std::string& account, std::function<void(bool)> done = {});
  const std::optional<std::string>& cookie() const noexcept { return cookie_; }

  // Leaves the home network, joins the pairing network and runs the whole
  // session; rejoins the home network when finished.
  void pair(PairingRequest request, Done done = {});

  SessionState state() const noexcept { return state_; }
  const std::vector<SessionState>& history() const noexcept { return history_; }
  const std::string& failure() const noexcept { return failure_; }
  const std::optional<std::string>& device_address() const noexcept { return device_address_; }
  const std::optional<DeviceDetails>& details() const noexcept { return details_; }
  const std::optional<std::string>& link_code() const noexcept { return link_code_; }
  const std::optional<std::string>& friendly_name() const noexcept { return friendly_name_; }
  const std::string& endpoint_set_name() const noexcept { return endpoint_set_; }
  std::size_t registration_polls() const noexcept { return polls_; }

 private:
  void advance(SessionState next);
  void fail(const std::string& why);
  void finish();
  void discover();
  void inspect();
  void provision_wifi();
  void link_and_register();
  void register_via_proxy();
  void await_and_complete();
  void poll_registration();
  void complete_setup();
  void call(const std::string& method, nlohmann::json args, OobeDone done);
  bool alive() const { return *alive_; }

  netsim::Fabric& fabric_;
  netsim::HostId host_;
  crypto::SeededRng rng_;
  std::optional<std::string> cookie_;
  std::string account_;
  std::string endpoint_set_ = "na";
  PairingRequest request_;
  Done done_;
  SessionState state_ = SessionState::idle;
  std::vector<SessionState> history_;
  std::string failure_;
  std::vector<netsim::LanId> home_lans_;
  std::optional<std::string> device_address_;
  std::optional<DeviceDetails> details_;
  std::optional<std::string> link_code_;
  std::optional<std::string> friendly_name_;
  std::uint64_t await_deadline_ = 0;
  std::size_t polls_ = 0;
  std::shared_ptr<bool> alive_ = std::make_shared<bool>(true);
};

}  // namespace echotb::client
