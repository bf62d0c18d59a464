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

#include "echotb/calling/user_agent.hpp"

#include "echotb/error.hpp"

namespace echotb::calling {

using nlohmann::json;
using wire::SipMessage;

namespace {
constexpr std::uint64_t kReconnectDelayMs = 1000;
constexpr std::size_t kMaxConnectFailures = 3;
}  // namespace

std::string_view to_string(RegState s) noexcept {
  switch (s) {
    case RegState::unregistered: return "unregistered";
    case RegState::registering: return "registering";
    case RegState::registered: return "registered";
    case RegState::failed: return "failed";
  }
  return "unregistered";
}

std::string_view to_string(Phase p) noexcept {
  switch (p) {
    case Phase::warming: return "warming";
    case Phase::inviting: return "inviting";
    case Phase::ringing: return "ringing";
    case Phase::established: return "established";
    case Phase::terminated: return "terminated";
  }
  return "terminated";
}

UserAgent::UserAgent(netsim::Fabric& fabric, netsim::HostId host, crypto::SeededRng rng, Upstream upstream)
    : fabric_(fabric), host_(std::move(host)), rng_(std::move(rng)), upstream_(std::move(upstream)) {}

UserAgent::~UserAgent() {
  *alive_ = false;
  channel_.on_message({});
  channel_.on_close({});
}

std::string UserAgent::local_address() const { return fabric_.uplink_address(host_).value_or("0.0.0.0"); }

std::string UserAgent::via() {
  return "SIP/2.0/TLS " + channel_.local().str() + ";branch=z9hG4bK" + random_token(rng_);
}

std::string UserAgent::contact() {
  std::string user = config_ ? config_->sip_username : host_;
  return "<sip:" + user + "@" + channel_.local().str() + ";transport=tls>";
}

void UserAgent::emit(std::string name, json payload) {
  if (upstream_) upstream_(wire::make_control("SipClient", std::move(name), std::move(payload)));
}

void UserAgent::send(const SipMessage& msg, std::string_view note) { send_sip(channel_, msg, note); }

// ---------------------------------------------------------------- registration

void UserAgent::apply_comms_config(const CommsConfig& config) {
  config_ = config;
  connect_failures_ = 0;
  if (channel_.is_open()) {
    send_register();
  } else {
    connect();
  }
}

void UserAgent::connect() {
  if (!config_) return;
  reg_state_ = RegState::registering;
  try {
    auto address = fabric_.resolve(config_->registrar_domain);
    channel_ = fabric_.open_channel(host_, {address, kRegistrarPort}, true, config_->registrar_domain);
  } catch (const Error& e) {
    reg_state_ = RegState::failed;
    fabric_.note(host_, std::string("ua cannot reach registrar: ") + e.what());
    if (++connect_failures_ < kMaxConnectFailures) {
      std::weak_ptr<bool> alive = alive_;
      fabric_.scheduler().after(kReconnectDelayMs * 5, [this, alive] {
        if (auto a = alive.lock(); a && *a) connect();
      });
    }
    return;
  }
  channel_.on_message([this](const Bytes& data, const netsim::MessageMeta&) { on_message(data); });
  channel_.on_close([this] { on_lost(); });
  register_call_id_ = random_token(rng_, 8) + "@" + host_;
  register_tag_ = random_token(rng_);
  send_register();
}

void UserAgent::send_register() {
  reg_state_ = RegState::registering;
  SipDialogIds ids{register_call_id_, "<" + config_->device_uri + ">;tag=" + register_tag_,
                   "<" + config_->device_uri + ">"};
  SipMessage reg = make_sip_request("REGISTER", "sip:" + config_->registrar_domain, ids, ++register_cseq_, via());
  reg.headers.add("Contact", contact());
  reg.headers.add("Expires", "3600");
  reg.headers.add("X-authtoken", config_->credential);
  send(reg);
}

void UserAgent::on_lost() {
  reg_state_ = RegState::unregistered;
  fabric_.note(host_, "ua lost registrar connection");
  std::weak_ptr<bool> alive = alive_;
  fabric_.scheduler().after(kReconnectDelayMs, [this, alive] {
    if (auto a = alive.lock(); a && *a && !channel_.is_open()) connect();
  });
}

void UserAgent::drop_connection() {
  if (!channel_.is_open()) return;
  channel_.close();
  on_lost();
}

// ---------------------------------------------------------------- directives

bool UserAgent::handle_directive(const wire::ControlMessage& d) {
  if (d.interface != "SipClient") return false;
  try {
    if (d.name == "WarmUp") {
      warm_up(d.payload);
    } else if (d.name == "BeginCall") {
      begin_call(d.payload);
    } else if (d.name == "AcceptCall") {
      accept_call();
    } else if (d.name == "EndCall") {
      std::string id = d.payload.value("call_id", std::string());
      if (id.empty()) {
        const CallState* live = live_call();
        id = live ? live->call_id : last_call_id_;
      }
      end_call(id);
    } else {
      return false;
    }
  } catch (const Error& e) {
    fabric_.note(host_, "ua " + d.name + " failed: " + e.what());
    emit("CallFailed", {{"reason", std::string(to_string(e.code()))}, {"directive", d.name}});
  }
  return true;
}

void UserAgent::warm_up(const json& payload) {
  warming_callee_ = payload.value("callee_uri", std::string());
  fabric_.note(host_, "ua warming up for " + *warming_callee_);
}

wire::SdpBody UserAgent::make_sdp(std::uint16_t port, const std::optional<netsim::Endpoint>& relay) {
  wire::SdpBody sdp;
  sdp.session_id = rng_.next_u64();
  sdp.media_port = port;
  sdp.candidates.push_back({wire::Candidate::Type::host, local_address(), port});
  if (relay) sdp.candidates.push_back({wire::Candidate::Type::relay, relay->address, relay->port});
  sdp.crypto.key_salt = rng_.bytes(wire::kSdesKeyLen + wire::kSdesSaltLen);
  return sdp;
}

std::string UserAgent::begin_call(const json& payload) {
  if (reg_state_ != RegState::registered) throw Error(Errc::invalid_state, "ua not registered");
  if (live_call()) throw Error(Errc::busy, "another call is live");
  std::string caller = payload.at("caller_uri").get<std::string>();
  std::string callee = payload.at("callee_uri").get<std::string>();
  auto token = crypto::CallAuthToken::decode(payload.at("token").get<std::string>());
  std::optional<netsim::Endpoint> relay;
  if (payload.contains("relay")) {
    relay = netsim::Endpoint{payload["relay"].at("address").get<std::string>(),
                             payload["relay"].at("port").get<std::uint16_t>()};
  }
  warming_callee_.reset();

  std::string call_id = random_token(rng_, 8) + "@" + host_;
  CallState& call = calls_[call_id];
  call.call_id = call_id;
  call.role = Role::caller;
  call.peer_uri = callee;
  call.token = token;
  call.local_sdp = make_sdp(next_media_port_++, relay);
  call.ids = {call_id, "<" + caller + ">;tag=" + random_token(rng_), "<" + callee + ">"};
  SipMessage invite = make_sip_request("INVITE", callee, call.ids, call.next_cseq++, via());
  invite.headers.add("Contact", contact());
  invite.headers.add("X-authtoken", payload.at("token").get<std::string>());
  invite.headers.add("Content-Type", "application/sdp");
  invite.body = wire::sdp_encode(*call.local_sdp);
  call.invite = invite;
  call.phase = Phase::inviting;
  last_call_id_ = call_id;
  send(invite);
  emit("OutboundCallRequested", {{"call_id", call_id}, {"callee_uri", callee}});
  return call_id;
}

void UserAgent::accept_call() {
  CallState* call = live_call_mut();
  if (!call || call->role != Role::callee || call->phase != Phase::ringing) {
    throw Error(Errc::unknown_call, "no ringing call to accept");
  }
  auto ok = wire::make_sip_response(call->invite, 200, wire::sip_tag_of(call->ids.to).value_or(""));
  ok.headers.set("Contact", contact());
  ok.headers.set("Content-Type", "application/sdp");
  ok.body = wire::sdp_encode(*call->local_sdp);
  send(ok);
  establish(*call, false);
  emit("InboundCallAccepted", {{"call_id", call->call_id}, {"auto_answer", false}});
}

void UserAgent::end_call(const std::string& call_id) {
  auto it = calls_.find(call_id);
  if (it == calls_.end() || it->second.phase == Phase::terminated) {
    throw Error(Errc::unknown_call, "no live call " + call_id);
  }
  CallState& call = it->second;
  if (call.phase == Phase::established) {
    std::string peer = call.role == Role::caller ? call.peer_uri : wire::sip_uri_of(call.ids.from);
    SipDialogIds ids = call.role == Role::caller ? call.ids : SipDialogIds{call.call_id, call.ids.to, call.ids.from};
    send(make_sip_request("BYE", peer, ids, call.next_cseq++, via()));
  } else if (call.role == Role::caller) {
    SipMessage cancel = call.invite;
    cancel.method = "CANCEL";
    cancel.body.clear();
    cancel.headers.remove("Content-Type");
    cancel.headers.remove("X-authtoken");
    cancel.headers.set("CSeq", std::to_string(call.invite.cseq_number()) + " CANCEL");
    send(cancel);
  } else {
    send(wire::make_sip_response(call.invite, 486, wire::sip_tag_of(call.ids.to).value_or("")));
  }
  terminate(call, "local hangup");
}

// ---------------------------------------------------------------- media

void UserAgent::talk(std::size_t frames) {
  const CallState* live = live_call();
  if (!live || live->phase != Phase::established) throw Error(Errc::invalid_state, "no established call");
  std::string id = live->call_id;
  std::weak_ptr<bool> alive = alive_;
  for (std::size_t i = 0; i < frames; ++i) {
    fabric_.scheduler().after(i * kFrameIntervalMs, [this, alive, id, i] {
      auto a = alive.lock();
      if (!a || !*a) return;
      auto it = calls_.find(id);
      if (it == calls_.end() || it->second.phase != Phase::established) return;
      send_frame(id, canary_frame(host_, i));
    });
  }
}

void UserAgent::send_frame(const std::string& call_id, ByteView payload) {
  auto it = calls_.find(call_id);
  if (it == calls_.end()) throw Error(Errc::unknown_call, "no call " + call_id);
  if (!it->second.media || it->second.phase != Phase::established) {
    throw Error(Errc::torn_down, "call " + call_id + " has no media");
  }
  it->second.media->send_frame(payload);
}

void UserAgent::establish(CallState& call, bool gateway_leg) {
  auto choice = select_path(fabric_, host_, *call.remote_sdp, gateway_leg);
  call.path = choice.kind;
  call.media = std::make_unique<MediaSession>(fabric_, host_, call.local_sdp->media_port, *call.local_sdp,
                                              *call.remote_sdp, choice);
  call.phase = Phase::established;
  fabric_.note(host_, "call " + call.call_id + " established role=" +
                          (call.role == Role::caller ? "caller" : "callee") + " path=" +
                          std::string(to_string(choice.kind)));
}

void UserAgent::terminate(CallState& call, const std::string& reason, bool notify) {
  if (call.phase == Phase::terminated) return;
  bool was_established = call.phase == Phase::established;
  call.phase = Phase::terminated;
  if (call.media) {
    call.final_stats = call.media->stats();
    call.media->stop();
  }
  fabric_.note(host_, "call " + call.call_id + " terminated: " + reason);
  if (!notify) return;
  if (was_established) {
    const auto& s = call.final_stats;
    emit("MediaStats", {{"call_id", call.call_id},
                        {"sent", s.sent},
                        {"received", s.received},
                        {"auth_drops", s.auth_drops},
                        {"replay_drops", s.replay_drops}});
  }
  emit("CallDisconnected", {{"call_id", call.call_id}, {"reason", reason}});
}

// ---------------------------------------------------------------- signaling

const CallState* UserAgent::call(const std::string& call_id) const {
  auto it = calls_.find(call_id);
  return it == calls_.end() ? nullptr : &it->second;
}

const CallState* UserAgent::live_call() const {
  for (const auto& [id, c] : calls_) {
    if (c.phase != Phase::terminated) return &c;
  }
  return nullptr;
}

CallState* UserAgent::live_call_mut() { return const_cast<CallState*>(live_call()); }

void UserAgent::on_message(const Bytes& data) {
  SipMessage msg;
  try {
    msg = wire::sip_parse(data);
  } catch (const Error& e) {
    fabric_.note(host_, std::string("ua dropped unparseable message: ") + e.what());
    return;
  }
  if (!msg.is_request()) {
    on_response(msg);
  } else if (msg.method == "INVITE") {
    on_invite(msg);
  } else {
    on_request(msg);
  }
}

void UserAgent::on_response(const SipMessage& msg) {
  const std::string method = msg.cseq_method();
  if (method == "REGISTER") {
    if (msg.status == 200) {
      reg_state_ = RegState::registered;
      connect_failures_ = 0;
      fabric_.note(host_, "ua registered " + config_->device_uri);
      emit("RegistrationStateChanged", {{"state", "registered"}});
    } else if (msg.status >= 300) {
      reg_state_ = RegState::failed;
      fabric_.note(host_, "ua registration refused with " + std::to_string(msg.status));
      emit("RegistrationStateChanged", {{"state", "failed"}, {"status", msg.status}});
    }
    return;
  }
  auto it = calls_.find(msg.call_id());
  if (it == calls_.end() || method != "INVITE") return;
  CallState& call = it->second;
  if (call.role != Role::caller || call.phase == Phase::terminated || call.phase == Phase::established) return;
  if (msg.status == 180) {
    call.phase = Phase::ringing;
    return;
  }
  if (msg.status < 200) return;
  call.final_status = msg.status;
  if (msg.status >= 300) {
    fabric_.note(host_, "call " + call.call_id + " failed with " + std::to_string(msg.status));
    emit("CallFailed", {{"call_id", call.call_id}, {"status", msg.status}});
    terminate(call, "rejected " + std::to_string(msg.status), false);
    return;
  }
  if (auto to = msg.headers.get("To")) call.ids.to = *to;
  SipMessage ack = make_sip_request("ACK", call.peer_uri, call.ids, call.invite.cseq_number(), via());
  ack.headers.set("CSeq", std::to_string(call.invite.cseq_number()) + " ACK");
  send(ack);
  try {
    call.remote_sdp = wire::sdp_decode(msg.body);
    call.gateway = msg.headers.get(kCallTypeHeader) == std::optional<std::string>("gateway");
    establish(call, call.gateway);
  } catch (const Error& e) {
    fabric_.note(host_, std::string("call answer unusable: ") + e.what());
    terminate(call, "bad answer");
    return;
  }
  emit("OutboundCallAccepted", {{"call_id", call.call_id}, {"path", std::string(to_string(*call.path))}});
}

void UserAgent::on_invite(const SipMessage& msg) {
  std::string call_id = msg.call_id();
  if (live_call() && !calls_.contains(call_id)) {
    send(wire::make_sip_response(msg, 486, random_token(rng_)));
    fabric_.note(host_, "ua busy, rejected " + call_id);
    return;
  }
  if (calls_.contains(call_id)) return;  // retransmission
  wire::SdpBody offer;
  try {
    offer = wire::sdp_decode(msg.body);
  } catch (const Error&) {
    send(wire::make_sip_response(msg, 403, random_token(rng_)));
    return;
  }
  std::optional<netsim::Endpoint> relay;
  for (const auto& c : offer.candidates) {
    if (c.type == wire::Candidate::Type::relay) relay = netsim::Endpoint{c.address, c.port};
  }
  CallState& call = calls_[call_id];
  call.call_id = call_id;
  call.role = Role::callee;
  call.invite = msg;
  call.peer_uri = wire::sip_uri_of(msg.headers.get("From").value_or(""));
  call.intercom = msg.headers.get(kCallTypeHeader) == std::optional<std::string>("intercom");
  call.remote_sdp = offer;
  call.local_sdp = make_sdp(next_media_port_++, relay);
  std::string to_tag = random_token(rng_);
  call.ids = {call_id, msg.headers.get("From").value_or(""), msg.headers.get("To").value_or("") + ";tag=" + to_tag};
  last_call_id_ = call_id;

  if (call.intercom) {
    // Drop-in: the registrar already checked the permission.
    auto ok = wire::make_sip_response(msg, 200, to_tag);
    ok.headers.set("Contact", contact());
    ok.headers.set("Content-Type", "application/sdp");
    ok.body = wire::sdp_encode(*call.local_sdp);
    send(ok, "auto-answer");
    establish(call, false);
    emit("InboundCallAccepted", {{"call_id", call_id}, {"auto_answer", true}});
    return;
  }
  send(wire::make_sip_response(msg, 180, to_tag));
  call.phase = Phase::ringing;
  emit("InboundCallRinging", {{"call_id", call_id}, {"caller_uri", call.peer_uri}});
}

void UserAgent::on_request(const SipMessage& msg) {
  auto it = calls_.find(msg.call_id());
  if (msg.method == "ACK") return;
  if (it == calls_.end()) {
    send(wire::make_sip_response(msg, 404, random_token(rng_)));
    return;
  }
  CallState& call = it->second;
  if (msg.method == "BYE") {
    send(wire::make_sip_response(msg, 200));
    terminate(call, "remote hangup");
  } else if (msg.method == "CANCEL") {
    send(wire::make_sip_response(msg, 200));
    if (call.phase == Phase::ringing || call.phase == Phase::warming || call.phase == Phase::inviting) {
      send(wire::make_sip_response(call.invite, 487, wire::sip_tag_of(call.ids.to).value_or("")));
      terminate(call, "cancelled");
    }
  }
}

}  // namespace echotb::calling
