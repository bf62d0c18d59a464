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

#include "echotb/crypto/rng.hpp"
#include "echotb/netsim/fabric.hpp"
#include "echotb/wire/control.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace echotb::client {

struct Captured {
  std::optional<std::string> link_code;
  std::optional<std::string> serial;
  std::optional<std::string> device_type;
  std::optional<std::string> locale;
  std::optional<std::string> credential_blob;  // armored ciphertext from connectToAP
  std::vector<std::string> methods;            // OOBE methods seen in cleartext
  std::size_t secured_observations = 0;
  std::size_t secured_bytes = 0;
};

struct HijackPlan {
  std::string account;         // attacker's own account
  bool complete_setup = true;  // drive setupComplete once the device holds a grant
};

/// Passive listener on a pairing network; optionally turns the captured link
/// code into a registration under its own account.
class Eavesdropper {
 public:
  Eavesdropper(netsim::Fabric& fabric, netsim::HostId host, crypto::SeededRng rng);
  ~Eavesdropper();
  Eavesdropper(const Eavesdropper&) = delete;
  Eavesdropper& operator=(const Eavesdropper&) = delete;

  const netsim::HostId& host() const noexcept { return host_; }
  // Logs in over the attacker's own uplink and arms the hijack.
  void arm(HijackPlan plan);
  // Joins the pairing network and taps it.
  void join(const std::string& ssid);

  const Captured& captured() const noexcept { return captured_; }
  const std::optional<std::string>& cookie() const noexcept { return cookie_; }
  // HTTP status of the hijack registerDevice, once answered.
  std::optional<int> hijack_status() const noexcept { return hijack_status_; }
  const std::string& hijack_error() const noexcept { return hijack_error_; }
  bool setup_completed() const noexcept { return setup_completed_; }

 private:
  void observe(const netsim::Observation& obs);
  void hijack();
  void drive_setup(std::size_t attempts);

  netsim::Fabric& fabric_;
  netsim::HostId host_;
  crypto::SeededRng rng_;
  std::optional<HijackPlan> plan_;
  std::optional<std::string> cookie_;
  std::string ssid_;
  Captured captured_;
  bool hijack_sent_ = false;
  std::optional<int> hijack_status_;
  std::string hijack_error_;
  bool setup_completed_ = false;
  std::shared_ptr<bool> alive_ = std::make_shared<bool>(true);
};

struct ProbeResult {
  std::vector<wire::ControlMessage> received;
  bool closed_by_peer = false;
};

/// Resends recorded bytes to a secured service endpoint and records what
/// comes back (used to replay a captured NegotiationCommand).
class ReplayProbe {
 public:
  ReplayProbe(netsim::Fabric& fabric, netsim::HostId host);
  ~ReplayProbe();
  void replay(const std::string& hostname, std::uint16_t port, Bytes frame);
  const ProbeResult& result() const noexcept { return result_; }

 private:
  netsim::Fabric& fabric_;
  netsim::HostId host_;
  netsim::ChannelEnd channel_;
  ProbeResult result_;
  std::shared_ptr<bool> alive_ = std::make_shared<bool>(true);
};

}  // namespace echotb::client
