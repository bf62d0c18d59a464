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

#include "echotb/calling/comms_config.hpp"
#include "echotb/calling/media.hpp"
#include "echotb/calling/signaling.hpp"
#include "echotb/crypto/call_token.hpp"
#include "echotb/crypto/rng.hpp"
#include "echotb/netsim/fabric.hpp"
#include "echotb/wire/control.hpp"
#include "echotb/wire/sdp.hpp"
#include "echotb/wire/sip.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>

namespace echotb::calling {

enum class RegState { unregistered, registering, registered, failed };
enum class Role { caller, callee };
enum class Phase { warming, inviting, ringing, established, terminated };

std::string_view to_string(RegState s) noexcept;
std::string_view to_string(Phase p) noexcept;

struct CallState {
  std::string call_id;
  Role role = Role::caller;
  Phase phase = Phase::warming;
  std::string peer_uri;
  bool intercom = false;
  bool gateway = false;
  std::optional<crypto::CallAuthToken> token;
  std::optional<wire::SdpBody> local_sdp;
  std::optional<wire::SdpBody> remote_sdp;
  std::optional<PathKind> path;
  std::unique_ptr<MediaSession> media;
  SipDialogIds ids;
  wire::SipMessage invite;  // sent (caller) or received (callee)
  std::uint32_t next_cseq = 1;
  std::optional<int> final_status;
  MediaStats final_stats;  // media counters, kept after the session is torn down
};

/// SIP user agent living inside a device. Driven by SipClient directives
/// from the cloud; reports upstream through the callback.
class UserAgent {
 public:
  using Upstream = std::function<void(const wire::ControlMessage&)>;

  UserAgent(netsim::Fabric& fabric, netsim::HostId host, crypto::SeededRng rng, Upstream upstream);
  ~UserAgent();
  UserAgent(const UserAgent&) = delete;
  UserAgent& operator=(const UserAgent&) = delete;

  // Opens the registrar connection and REGISTERs. Re-registers on reconnect.
  void apply_comms_config(const CommsConfig& config);
  const std::optional<CommsConfig>& config() const noexcept { return config_; }
  RegState registration() const noexcept { return reg_state_; }

  // SipClient.* directive dispatch. Returns false for names it does not handle.
  bool handle_directive(const wire::ControlMessage& directive);

  void warm_up(const nlohmann::json& payload);
  // Throws Error(busy) while another call is live, Error(invalid_state) when unregistered.
  std::string begin_call(const nlohmann::json& payload);
  // Answers the ringing call. Throws Error(unknown_call) if none.
  void accept_call();
  // Throws Error(unknown_call) for unknown or already terminated calls.
  void end_call(const std::string& call_id);

  // Sends `frames` canary frames at the 20 ms cadence on the live call.
  void talk(std::size_t frames);
  // Throws unknown_call / torn_down.
  void send_frame(const std::string& call_id, ByteView payload);
  // Drops the registrar connection (the UA reconnects on its own).
  void drop_connection();

  const std::map<std::string, CallState>& calls() const noexcept { return calls_; }
  const CallState* call(const std::string& call_id) const;
  // The one non-terminated call, if any.
  const CallState* live_call() const;
  const std::string& last_call_id() const noexcept { return last_call_id_; }
  std::string local_address() const;

 private:
  void connect();
  void on_lost();
  void send_register();
  void on_message(const Bytes& data);
  void on_response(const wire::SipMessage& msg);
  void on_invite(const wire::SipMessage& msg);
  void on_request(const wire::SipMessage& msg);
  void establish(CallState& call, bool gateway_leg);
  void terminate(CallState& call, const std::string& reason, bool notify = true);
  void emit(std::string name, nlohmann::json payload);
  void send(const wire::SipMessage& msg, std::string_view note = {});
  std::string via();
  std::string contact();
  CallState* live_call_mut();
  wire::SdpBody make_sdp(std::uint16_t port, const std::optional<netsim::Endpoint>& relay);

  netsim::Fabric& fabric_;
  netsim::HostId host_;
  crypto::SeededRng rng_;
  Upstream upstream_;
  std::optional<CommsConfig> config_;
  RegState reg_state_ = RegState::unregistered;
  netsim::ChannelEnd channel_;
  std::uint32_t register_cseq_ = 0;
  std::string register_call_id_;
  std::string register_tag_;
  std::size_t connect_failures_ = 0;
  std::uint16_t next_media_port_ = 40000;
  std::optional<std::string> warming_callee_;
  std::map<std::string, CallState> calls_;
  std::string last_call_id_;
  std::shared_ptr<bool> alive_ = std::make_shared<bool>(true);
};

}  // namespace echotb::calling
