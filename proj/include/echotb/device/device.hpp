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

#include "echotb/calling/user_agent.hpp"
#include "echotb/cloud/endpoints.hpp"
#include "echotb/cloud/services.hpp"
#include "echotb/crypto/credential.hpp"
#include "echotb/device/identity.hpp"
#include "echotb/netsim/fabric.hpp"
#include "echotb/wire/control.hpp"
#include "echotb/wire/oobe.hpp"

#include <json.hpp>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace echotb::device {

enum class Mode { factory, pairing, paired };
enum class RegStatus { none, pending, registered, expired };

using echotb::to_string;
std::string_view to_string(Mode m) noexcept;
std::string_view to_string(RegStatus s) noexcept;

struct ScanEntry {
  std::string ssid;
  int signal = 0;  // dBm
};

inline constexpr std::uint16_t kProxyPort = 443;
inline constexpr std::uint64_t kLinkPollIntervalMs = 2000;
inline constexpr std::uint64_t kTeardownDelayMs = 50;
inline const std::vector<std::uint64_t> kAvsBackoffMs = {1000, 2000, 4000, 8000, 16000, 32000, 60000, 60000};
inline constexpr std::string_view kOobeAckMarker = "echo-oobe";

class Device {
 public:
  Device(netsim::Fabric& fabric, netsim::HostId host, DeviceIdentity identity, crypto::SeededRng rng,
         std::size_t pairing_slot = 0);
  ~Device();
  Device(const Device&) = delete;
  Device& operator=(const Device&) = delete;

  const netsim::HostId& host() const noexcept { return host_; }
  const DeviceIdentity& identity() const noexcept { return identity_; }
  Mode mode() const noexcept { return mode_; }
  const std::optional<cloud::Grant>& grant() const noexcept { return grant_; }
  const std::optional<crypto::WifiCredential>& credential() const noexcept { return credential_; }
  const std::optional<std::string>& link_code() const noexcept { return link_code_; }
  RegStatus registration() const noexcept { return reg_status_; }
  const cloud::EndpointSet& endpoints() const;
  std::optional<netsim::LanId> home_lan() const noexcept { return home_lan_; }

  // ---- pairing
  // Throws Error(invalid_state) if already pairing.
  netsim::PairingNetwork& enter_pairing_mode();
  std::string pairing_ssid() const { return derive_pairing_ssid(identity_.serial); }
  wire::OobeEnvelope serve_oobe(const wire::OobeEnvelope& request);
  void set_scan_list(std::vector<ScanEntry> list) { scan_override_ = std::move(list); }
  std::vector<ScanEntry> scan_list() const;

  // Joins a LAN the way connectToAP would, without the pairing exchange.
  void connect_wifi(const crypto::WifiCredential& credential);
  // Factory provisioning path: installs a grant and walks the mode machine
  // through pairing to paired.
  void provision(const cloud::Grant& grant);

  // ---- AVS
  void avs_connect();
  bool avs_up() const noexcept { return avs_up_; }
  std::size_t avs_attempts() const noexcept { return avs_attempts_; }
  std::size_t refreshes_handled() const noexcept { return refreshes_; }
  std::size_t unsupported_acks() const noexcept { return unsupported_; }
  // Signed NegotiationCommand payload for the current grant.
  nlohmann::json make_negotiation(std::int64_t unix_time) const;
  // Exact bytes of the last NegotiationCommand frame sent.
  const Bytes& last_negotiation_frame() const noexcept { return last_negotiation_; }
  void dispatch_control(const wire::ControlMessage& message);

  calling::UserAgent& ua() noexcept { return *ua_; }
  const calling::UserAgent& ua() const noexcept { return *ua_; }

 private:
  void set_mode(Mode next);
  void start_oobe_server();
  void start_proxy();
  void stop_pairing();
  void handle_oobe(const wire::OobeEnvelope& request, std::function<void(wire::OobeEnvelope)> reply);
  void request_link_code(std::function<void(wire::OobeEnvelope)> reply);
  void poll_link_code(std::uint64_t generation);
  void cloud_call(const std::string& op, const nlohmann::json& body,
                  std::function<void(std::optional<nlohmann::json>, std::string)> done);
  void avs_send(std::uint32_t stream, const wire::ControlMessage& message);
  void avs_schedule_retry();
  void send_upstream_event(const wire::ControlMessage& event);

  netsim::Fabric& fabric_;
  netsim::HostId host_;
  DeviceIdentity identity_;
  crypto::SeededRng rng_;
  std::size_t pairing_slot_;
  Mode mode_ = Mode::factory;
  std::optional<cloud::Grant> grant_;
  std::optional<crypto::WifiCredential> credential_;
  std::optional<netsim::LanId> home_lan_;
  std::optional<std::string> link_code_;
  RegStatus reg_status_ = RegStatus::none;
  std::uint64_t link_generation_ = 0;
  std::optional<std::string> pairing_ssid_;
  std::optional<std::vector<ScanEntry>> scan_override_;

  netsim::ChannelEnd avs_;
  bool avs_up_ = false;
  std::size_t avs_attempts_ = 0;
  std::size_t avs_failures_ = 0;
  std::size_t refreshes_ = 0;
  std::size_t unsupported_ = 0;
  Bytes last_negotiation_;

  std::unique_ptr<calling::UserAgent> ua_;
  std::shared_ptr<bool> alive_ = std::make_shared<bool>(true);
};

}  // namespace echotb::device
