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

#include "echotb/cloud/registrar.hpp"

#include "echotb/calling/comms_config.hpp"
#include "echotb/calling/media.hpp"
#include "echotb/calling/signaling.hpp"
#include "echotb/cloud/endpoints.hpp"
#include "echotb/error.hpp"
#include "echotb/wire/sdp.hpp"

namespace echotb::cloud {

using calling::send_sip;
using wire::SipMessage;

Registrar::Registrar(netsim::Fabric& fabric, netsim::HostId host, AccountService& accounts, crypto::SeededRng rng)
    : fabric_(fabric), host_(std::move(host)), accounts_(accounts), rng_(std::move(rng)) {
  fabric_.listen(host_, calling::kRegistrarPort, [this](netsim::ChannelEnd ch) { adopt(std::move(ch)); });
}

std::string Registrar::via() { return "SIP/2.0/TLS sip.amazon.test;branch=z9hG4bK" + calling::random_token(rng_); }

bool Registrar::is_live(const SipBinding& b) const {
  return b.channel.is_open() && b.expires > unix_now(fabric_);
}

std::vector<const SipBinding*> Registrar::live_bindings(std::string_view account_uri) const {
  std::vector<const SipBinding*> out;
  for (const auto& [uri, b] : bindings_) {
    if (b.account_uri == account_uri && is_live(b)) out.push_back(&b);
  }
  return out;
}

std::size_t Registrar::legs_forwarded(const std::string& call_id) const {
  auto it = calls_.find(call_id);
  return it == calls_.end() ? 0 : it->second.legs.size();
}

void Registrar::adopt(netsim::ChannelEnd channel) {
  channel.on_message([this, channel](const Bytes& data, const netsim::MessageMeta&) { on_message(channel, data); });
  channel.on_close([this, id = channel.id()] {
    std::erase_if(bindings_, [id](const auto& kv) { return kv.second.channel.id() == id; });
  });
}

void Registrar::on_message(netsim::ChannelEnd channel, const Bytes& data) {
  SipMessage msg;
  try {
    msg = wire::sip_parse(data);
  } catch (const Error& e) {
    fabric_.note(host_, std::string("registrar dropped unparseable message: ") + e.what());
    return;
  }
  if (!msg.is_request()) {
    on_response(channel, std::move(msg));
  } else if (msg.method == "REGISTER") {
    on_register(channel, msg);
  } else if (msg.method == "INVITE") {
    on_invite(channel, msg);
  } else if (msg.method == "CANCEL") {
    on_cancel(channel, msg);
  } else {
    on_in_dialog(channel, msg);
  }
}

void Registrar::reject(netsim::ChannelEnd& channel, const SipMessage& request, int status, const std::string& why) {
  send_sip(channel, wire::make_sip_response(request, status, calling::random_token(rng_)));
  fabric_.note(host_, "registrar " + std::to_string(status) + " " + request.method + ": " + why);
}

void Registrar::on_register(netsim::ChannelEnd& channel, const SipMessage& msg) {
  std::string device_uri = wire::sip_uri_of(msg.headers.get("To").value_or(""));
  auto serial = accounts_.serial_of_device_uri(device_uri);
  auto owner = serial ? accounts_.owner_of(*serial) : std::nullopt;
  auto credentials = msg.headers.get_all("X-authtoken");
  if (!owner || credentials.size() != 1 ||
      !accounts_.check_sip_credential(account_uri_for(*owner), device_uri, credentials.front())) {
    reject(channel, msg, 403, "bad registration credential for " + device_uri);
    return;
  }
  SipBinding b{account_uri_for(*owner), device_uri, msg.headers.get("Contact").value_or(""), channel,
               unix_now(fabric_) + kBindingExpirySeconds};
  bindings_[device_uri] = b;
  auto ok = wire::make_sip_response(msg, 200, calling::random_token(rng_));
  if (!b.contact.empty()) ok.headers.set("Contact", b.contact);
  ok.headers.set("Expires", std::to_string(kBindingExpirySeconds));
  send_sip(channel, ok);
  fabric_.note(host_, "registrar bound " + device_uri + " under " + b.account_uri);
}

void Registrar::record_key(const std::string& call_id, const std::string& role, const SipMessage& msg) {
  try {
    auto sdp = wire::sdp_decode(msg.body);
    recorded_.push_back({call_id, role, sdp.crypto.key_salt, calling::ssrc_of(sdp)});
  } catch (const Error&) {
  }
}

void Registrar::on_invite(netsim::ChannelEnd& channel, const SipMessage& msg) {
  std::string call_id = msg.call_id();
  send_sip(channel, wire::make_sip_response(msg, 100));
  if (calls_.contains(call_id)) {
    reject(channel, msg, 403, "duplicate Call-ID " + call_id);
    return;
  }
  std::string from_uri = wire::sip_uri_of(msg.headers.get("From").value_or(""));
  auto caller_binding = bindings_.find(from_uri);
  if (caller_binding == bindings_.end() || caller_binding->second.channel.id() != channel.id()) {
    reject(channel, msg, 403, "caller " + from_uri + " not registered on this connection");
    return;
  }
  auto tokens = msg.headers.get_all("X-authtoken");
  if (tokens.size() != 1) {
    reject(channel, msg, 403, "expected exactly one X-authtoken");
    return;
  }
  auto caller_account = accounts_.account_of_account_uri(caller_binding->second.account_uri);
  const Account* account = caller_account ? accounts_.find_account(*caller_account) : nullptr;
  crypto::CallAuthToken token;
  try {
    token = crypto::CallAuthToken::decode(tokens.front());
  } catch (const Error&) {
    reject(channel, msg, 403, "undecodable call token");
    return;
  }
  if (!account || !crypto::verify_call_token(account->signing.public_key, token, from_uri, msg.request_uri,
                                             unix_now(fabric_), nonces_)) {
    reject(channel, msg, 403, "call token rejected");
    return;
  }

  // Route.
  std::vector<std::pair<netsim::ChannelEnd, std::string>> targets;
  std::string call_type;
  const std::string& target = msg.request_uri;
  if (auto callee_serial = accounts_.serial_of_device_uri(target)) {
    auto callee_owner = accounts_.owner_of(*callee_serial);
    if (token.type != crypto::CallType::intercom || !callee_owner ||
        !accounts_.dropin_allowed(*caller_account, *callee_owner)) {
      reject(channel, msg, 403, "no drop-in permission for " + target);
      return;
    }
    auto b = bindings_.find(target);
    if (b == bindings_.end() || !is_live(b->second)) {
      reject(channel, msg, 404, target + " not registered");
      return;
    }
    targets.emplace_back(b->second.channel, target);
    call_type = "intercom";
  } else if (auto callee_account = accounts_.account_of_account_uri(target)) {
    if (token.type != crypto::CallType::regular) {
      reject(channel, msg, 403, "intercom token for an account target");
      return;
    }
    for (const auto* b : live_bindings(target)) {
      if (b->device_uri != from_uri) targets.emplace_back(b->channel, b->device_uri);
    }
    call_type = "regular";
    const Account* callee = accounts_.find_account(*callee_account);
    if (targets.empty() && callee && callee->phone && gateway_) {
      try {
        auto gw = fabric_.open_channel(host_, *gateway_, true, std::string(kPstnHostname));
        adopt(gw);
        targets.emplace_back(gw, "tel:" + *callee->phone);
        call_type = "gateway";
      } catch (const Error& e) {
        reject(channel, msg, 404, std::string("gateway unavailable: ") + e.what());
        return;
      }
    }
  }
  if (targets.empty()) {
    reject(channel, msg, 404, "no route for " + target);
    return;
  }

  record_key(call_id, "offer", msg);
  CallRecord& call = calls_[call_id];
  call.caller = channel;
  call.invite = msg;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    Leg leg;
    leg.channel = targets[i].first;
    leg.target = targets[i].second;
    leg.branch = via();
    leg.invite = msg;
    leg.invite.headers.prepend("Via", leg.branch);
    leg.invite.headers.set(calling::kCallTypeHeader, call_type);
    call.legs.push_back(std::move(leg));
  }
  fabric_.note(host_, "registrar routing " + call_id + " as " + call_type + " to " + std::to_string(targets.size()) +
                          " leg(s)");
  for (std::size_t i = 0; i < call.legs.size(); ++i) {
    send_sip(call.legs[i].channel, call.legs[i].invite,
             "leg " + std::to_string(i + 1) + "/" + std::to_string(call.legs.size()) + " " + call_type);
  }
}

void Registrar::cancel_leg(const std::string& call_id, Leg& leg, std::size_t index) {
  if (leg.done || leg.cancelled) return;
  leg.cancelled = true;
  SipMessage cancel = leg.invite;
  cancel.method = "CANCEL";
  cancel.body.clear();
  cancel.headers.remove("Content-Type");
  cancel.headers.remove("X-authtoken");
  cancel.headers.set("CSeq", std::to_string(leg.invite.cseq_number()) + " CANCEL");
  cancel.headers.set("Content-Length", "0");
  ++cancels_sent_;
  send_sip(leg.channel, cancel, "leg " + std::to_string(index + 1));
  (void)call_id;
}

void Registrar::on_cancel(netsim::ChannelEnd& channel, const SipMessage& msg) {
  auto it = calls_.find(msg.call_id());
  if (it == calls_.end() || it->second.caller.id() != channel.id()) {
    reject(channel, msg, 404, "CANCEL for unknown call");
    return;
  }
  send_sip(channel, wire::make_sip_response(msg, 200));
  auto& call = it->second;
  if (call.winner) return;  // too late, a BYE will follow
  call.caller_cancelled = true;
  for (std::size_t i = 0; i < call.legs.size(); ++i) cancel_leg(it->first, call.legs[i], i);
}

void Registrar::on_in_dialog(netsim::ChannelEnd& channel, const SipMessage& msg) {
  auto it = calls_.find(msg.call_id());
  if (it == calls_.end() || !it->second.winner) {
    if (msg.method != "ACK") reject(channel, msg, 404, msg.method + " outside a dialog");
    return;
  }
  auto& call = it->second;
  Leg& leg = call.legs[*call.winner];
  SipMessage fwd = msg;
  fwd.headers.prepend("Via", via());
  if (channel.id() == call.caller.id()) {
    send_sip(leg.channel, fwd);
  } else if (channel.id() == leg.channel.id()) {
    send_sip(call.caller, fwd);
  }
}

void Registrar::on_response(netsim::ChannelEnd& channel, SipMessage msg) {
  auto it = calls_.find(msg.call_id());
  if (it == calls_.end()) return;
  auto& call = it->second;
  const std::string method = msg.cseq_method();
  msg.headers.remove_first("Via");

  if (method != "INVITE") {
    if (method == "CANCEL") return;  // our own CANCELs
    // In-dialog response: back to whoever sent the request.
    if (!call.winner) return;
    Leg& w = call.legs[*call.winner];
    if (channel.id() == call.caller.id()) {
      send_sip(w.channel, msg);
    } else if (channel.id() == w.channel.id()) {
      send_sip(call.caller, msg);
    }
    return;
  }

  std::size_t index = call.legs.size();
  for (std::size_t i = 0; i < call.legs.size(); ++i) {
    if (call.legs[i].channel.id() == channel.id()) index = i;
  }
  if (index == call.legs.size()) return;
  Leg& leg = call.legs[index];
  if (msg.status < 200) {
    if (msg.status > 100 && !call.winner && !call.caller_cancelled) send_sip(call.caller, msg);
    return;
  }
  leg.done = true;
  leg.status = msg.status;
  if (msg.status < 300) {
    if (call.winner) return;  // a second answer after the race was decided
    call.winner = index;
    record_key(it->first, "answer", msg);
    send_sip(call.caller, msg, "leg " + std::to_string(index + 1));
    call.final_sent = true;
    for (std::size_t i = 0; i < call.legs.size(); ++i) {
      if (i != index) cancel_leg(it->first, call.legs[i], i);
    }
    return;
  }
  if (leg.cancelled && !call.caller_cancelled) return;  // 487 after we cancelled a losing leg
  bool all_done = true;
  for (const auto& l : call.legs) all_done = all_done && l.done;
  if (all_done && !call.winner && !call.final_sent) {
    call.final_sent = true;
    send_sip(call.caller, msg);
  }
}

}  // namespace echotb::cloud
