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

#include "echotb/cloud/cloud.hpp"

#include "echotb/error.hpp"
#include "echotb/netsim/http_rpc.hpp"
#include "echotb/wire/frame.hpp"

namespace echotb::cloud {

using nlohmann::json;

namespace {

std::pair<int, std::string> http_status_of(Errc code) {
  switch (code) {
    case Errc::unauthorized:
    case Errc::bad_cookie: return {401, "Unauthorized"};
    case Errc::already_registered:
    case Errc::forbidden: return {403, "Forbidden"};
    case Errc::not_found: return {404, "Not Found"};
    case Errc::dead_code: return {410, "Gone"};
    default: return {400, "Bad Request"};
  }
}

std::string cookie_of(const wire::HttpMessage& req) {
  auto header = req.headers.get("Cookie").value_or("");
  auto pos = header.find("session=");
  if (pos == std::string::npos) return {};
  auto value = header.substr(pos + 8);
  return value.substr(0, value.find(';'));
}

wire::HttpMessage json_response(int status, const std::string& reason, const json& body) {
  return wire::make_http_response(status, reason, to_bytes(body.dump()));
}

}  // namespace

Cloud::Cloud(netsim::Fabric& fabric, crypto::SeededRng rng, CloudOptions options)
    : fabric_(fabric), options_(std::move(options)), accounts_(rng.derive("accounts")) {
  fabric_.create_lan({options_.lan, options_.prefix, false, true, "", ""});
  auto api = fabric_.attach(hosts_.api, options_.lan);
  auto avs = fabric_.attach(hosts_.avs, options_.lan);
  auto sip = fabric_.attach(hosts_.sip, options_.lan);
  auto turn = fabric_.attach(hosts_.turn, options_.lan);
  auto pstn = fabric_.attach(hosts_.pstn, options_.lan);
  for (const auto& set : endpoint_sets()) {
    fabric_.register_name(set.api, api);
    fabric_.register_name(set.avs, avs);
    fabric_.register_name(set.sip, sip);
    fabric_.register_name(set.turn, turn);
  }
  fabric_.register_name(std::string(kPstnHostname), pstn);

  registrar_ = std::make_unique<Registrar>(fabric_, hosts_.sip, accounts_, rng.derive("registrar"));
  registrar_->set_gateway({pstn, kGatewayPort});
  relay_ = std::make_unique<Relay>(fabric_, hosts_.turn);
  gateway_ = std::make_unique<GatewayStub>(fabric_, hosts_.pstn, rng.derive("gateway"));
  serve_api();
  serve_avs();
}

// ---------------------------------------------------------------- HTTP API

void Cloud::serve_api() {
  netsim::serve_http(fabric_, hosts_.api, kHttpsPort, netsim::Layer::http,
                     [this](const wire::HttpMessage& req, const netsim::ChannelEnd&, netsim::HttpResponder respond) {
    std::string op = req.path.size() > 1 ? req.path.substr(1) : req.path;
    auto now = unix_now(fabric_);
    try {
      json args = json::parse(req.body_text());
      json out;
      if (op == "login") {
        out["cookie"] = accounts_.login(args.at("account").get<std::string>());
        auto resp = json_response(200, "OK", out);
        resp.headers.set("Set-Cookie", "session=" + out["cookie"].get<std::string>() + "; Secure");
        respond(resp, "200 login");
        return;
      }
      if (op == "createLinkCode") {
        out["code"] = accounts_.create_link_code(args.at("device_type").get<std::string>(),
                                                 args.at("serial").get<std::string>(),
                                                 hex_decode(args.at("secret").get<std::string>()), now);
      } else if (op == "checkLinkCode") {
        auto r = accounts_.check_link_code(args.at("serial").get<std::string>(),
                                           hex_decode(args.at("secret").get<std::string>()),
                                           args.at("code").get<std::string>(), now);
        out["state"] = std::string(to_string(r.state));
        if (r.grant) out["grant"] = r.grant->to_json();
      } else if (op == "registerDevice") {
        std::string serial = args.at("serial").get<std::string>();
        try {
          auto account = accounts_.register_device(cookie_of(req), args.at("device_type").get<std::string>(), serial,
                                                   args.at("link_code").get<std::string>(), now);
          fabric_.note(hosts_.api, "cloud registered " + serial + " to account " + account);
        } catch (const Error& e) {
          fabric_.note(hosts_.api, "cloud rejected registerDevice for " + serial + ": " + e.what());
          throw;
        }
        out["status"] = "registered";
      } else if (op == "deregister") {
        auto* account = accounts_.account_by_cookie(cookie_of(req));
        std::string serial = args.at("serial").get<std::string>();
        if (!account || accounts_.owner_of(serial) != account->id) throw Error(Errc::unauthorized, "not the owner");
        deregister(serial);
        out["status"] = "deregistered";
      } else {
        throw Error(Errc::not_found, "no operation " + op);
      }
      respond(json_response(200, "OK", out), "200 " + op);
    } catch (const Error& e) {
      auto [status, reason] = http_status_of(e.code());
      respond(json_response(status, reason, {{"error", std::string(to_string(e.code()))}, {"detail", e.what()}}),
              std::to_string(status) + " " + op + " " + std::string(to_string(e.code())));
    } catch (const json::exception& e) {
      respond(json_response(400, "Bad Request", {{"error", "malformed"}, {"detail", e.what()}}),
              "400 " + op + " malformed");
    }
  });
}

// ---------------------------------------------------------------- AVS

void Cloud::serve_avs() {
  fabric_.listen(hosts_.avs, kHttpsPort, [this](netsim::ChannelEnd ch) {
    avs_sessions_[ch.id()] = AvsSession{ch, false, "", ""};
    ch.on_message([this, ch](const Bytes& data, const netsim::MessageMeta&) { on_avs_message(ch, data); });
    ch.on_close([this, id = ch.id()] {
      auto it = avs_sessions_.find(id);
      if (it == avs_sessions_.end()) return;
      auto s = avs_by_serial_.find(it->second.serial);
      if (s != avs_by_serial_.end() && s->second == id) avs_by_serial_.erase(s);
      avs_sessions_.erase(it);
    });
  });
}

void Cloud::send_control(netsim::ChannelEnd& channel, const wire::ControlMessage& message) {
  if (!channel.is_open()) return;
  channel.send(wire::frame_encode({wire::kControlStream, wire::control_encode(message)}), netsim::Layer::control,
               message.interface + "." + message.name);
}

void Cloud::on_avs_message(netsim::ChannelEnd channel, const Bytes& data) {
  auto it = avs_sessions_.find(channel.id());
  if (it == avs_sessions_.end()) return;
  AvsSession& session = it->second;
  wire::ControlMessage msg;
  try {
    msg = wire::control_decode(wire::frame_decode(data).data);
  } catch (const Error& e) {
    send_control(channel, wire::make_control("System", "ExceptionEncountered", {{"reason", "malformed"}}));
    return;
  }
  auto now = unix_now(fabric_);
  if (msg.interface == "System" && msg.name == "NegotiationCommand") {
    try {
      auto id = accounts_.avs_accept(msg.payload, now);
      session.authenticated = true;
      session.serial = id.serial;
      session.account = id.account;
      avs_by_serial_[id.serial] = channel.id();
      ++avs_accepts_;
      fabric_.note(hosts_.avs, "avs accepted " + id.serial + " for account " + id.account);
      send_control(channel, wire::make_control("System", "NegotiationAccepted", {{"serial", id.serial}}));
      for (const auto& subsystem : kRefreshSubsystems) {
        send_control(channel, wire::make_control("System", "RefreshState", {{"subsystem", subsystem}}));
      }
    } catch (const Error& e) {
      avs_rejections_.push_back(e.what());
      fabric_.note(hosts_.avs, std::string("avs rejected negotiation: ") + e.what());
      send_control(channel, wire::make_control("System", "NegotiationRejected", {{"reason", e.what()}}));
      channel.close();
      avs_sessions_.erase(it);
    }
    return;
  }
  if (!session.authenticated) {
    send_control(channel, wire::make_control("System", "ExceptionEncountered", {{"reason", "unauthenticated"}}));
    return;
  }
  events_.push_back({fabric_.now(), session.serial, msg});
  if (msg.interface == "System" && msg.name == "RefreshStateAck") {
    ++refresh_acks_[session.serial];
  } else if (msg.interface == "SipClient" && msg.name == "ConfigureCommsRequest") {
    try {
      send_control(channel, wire::make_control("SipClient", "ConfigureComms",
                                               accounts_.configure_comms(session.serial).to_json()));
    } catch (const Error& e) {
      send_control(channel, wire::make_control("System", "ExceptionEncountered", {{"reason", e.what()}}));
    }
  }
}

bool Cloud::avs_session_up(const std::string& serial) const { return avs_by_serial_.contains(serial); }

std::size_t Cloud::refresh_acks(const std::string& serial) const {
  auto it = refresh_acks_.find(serial);
  return it == refresh_acks_.end() ? 0 : it->second;
}

void Cloud::send_directive(const std::string& serial, const wire::ControlMessage& message) {
  auto it = avs_by_serial_.find(serial);
  if (it == avs_by_serial_.end()) throw Error(Errc::offline, serial + " has no AVS session");
  send_control(avs_sessions_.at(it->second).channel, message);
}

// ---------------------------------------------------------------- orchestration

crypto::CallAuthToken Cloud::begin_call(const CallRequest& request) {
  auto owner = accounts_.owner_of(request.caller_serial);
  if (!owner) throw Error(Errc::unauthorized, request.caller_serial + " is not registered");
  std::string caller_uri = device_uri_for(request.caller_serial);
  auto now = unix_now(fabric_);
  crypto::CallAuthToken token =
      request.token ? *request.token
                    : accounts_.mint_call_token(*owner, caller_uri, request.token_callee.value_or(request.callee_uri),
                                                request.type, now);
  auto relay = relay_->allocate(request.caller_serial + "->" + request.callee_uri);
  send_directive(request.caller_serial, wire::make_control("SipClient", "WarmUp", {{"callee_uri", request.callee_uri}}));
  send_directive(request.caller_serial,
                 wire::make_control("SipClient", "BeginCall",
                                    {{"caller_uri", caller_uri},
                                     {"callee_uri", request.callee_uri},
                                     {"type", std::string(crypto::to_string(request.type))},
                                     {"token", token.encode()},
                                     {"relay", {{"address", relay.address}, {"port", relay.port}}}}));
  return token;
}

void Cloud::accept_call(const std::string& serial) {
  send_directive(serial, wire::make_control("SipClient", "AcceptCall"));
}

void Cloud::end_call(const std::string& serial) { send_directive(serial, wire::make_control("SipClient", "EndCall")); }

void Cloud::deregister(const std::string& serial) {
  accounts_.deregister(serial);
  fabric_.note(hosts_.api, "cloud deregistered " + serial);
  if (auto it = avs_by_serial_.find(serial); it != avs_by_serial_.end()) {
    auto s = avs_sessions_.find(it->second);
    avs_by_serial_.erase(it);
    if (s != avs_sessions_.end()) {
      s->second.channel.close();
      avs_sessions_.erase(s);
    }
  }
}

}  // namespace echotb::cloud
