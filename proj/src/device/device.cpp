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

#include "echotb/device/device.hpp"

#include "echotb/error.hpp"
#include "echotb/netsim/http_rpc.hpp"
#include "echotb/wire/frame.hpp"

namespace echotb::device {

using nlohmann::json;
using wire::OobeEnvelope;

std::string_view to_string(Mode m) noexcept {
  switch (m) {
    case Mode::factory: return "factory";
    case Mode::pairing: return "pairing";
    case Mode::paired: return "paired";
  }
  return "factory";
}

std::string_view to_string(RegStatus s) noexcept {
  switch (s) {
    case RegStatus::none: return "none";
    case RegStatus::pending: return "pending";
    case RegStatus::registered: return "registered";
    case RegStatus::expired: return "expired";
  }
  return "none";
}

Device::Device(netsim::Fabric& fabric, netsim::HostId host, DeviceIdentity identity, crypto::SeededRng rng,
               std::size_t pairing_slot)
    : fabric_(fabric),
      host_(std::move(host)),
      identity_(std::move(identity)),
      rng_(std::move(rng)),
      pairing_slot_(pairing_slot) {
  fabric_.add_host(host_);
  ua_ = std::make_unique<calling::UserAgent>(fabric_, host_, rng_.derive("ua"),
                                             [this](const wire::ControlMessage& e) { send_upstream_event(e); });
}

Device::~Device() {
  *alive_ = false;
  avs_.on_message({});
  avs_.on_close({});
}

const cloud::EndpointSet& Device::endpoints() const {
  return cloud::endpoint_set(cloud::endpoint_set_for_locale(identity_.locale));
}

void Device::set_mode(Mode next) {
  bool ok = (mode_ == Mode::factory && next == Mode::pairing) || (mode_ == Mode::pairing && next == Mode::paired) ||
            (mode_ == Mode::paired && next == Mode::pairing);
  if (!ok) {
    throw Error(Errc::invalid_state,
                "mode " + std::string(to_string(mode_)) + " -> " + std::string(to_string(next)) + " not allowed");
  }
  if (next == Mode::paired && !grant_) throw Error(Errc::invalid_state, "paired without a grant");
  fabric_.note(host_, "mode " + std::string(to_string(mode_)) + " -> " + std::string(to_string(next)));
  mode_ = next;
}

// ---------------------------------------------------------------- pairing mode

netsim::PairingNetwork& Device::enter_pairing_mode() {
  if (mode_ == Mode::pairing) throw Error(Errc::invalid_state, host_ + " is already in pairing mode");
  std::string ssid = pairing_ssid();
  auto& net = fabric_.create_pairing_network(host_, ssid, cloud::hardwired_hostnames(), pairing_slot_);
  pairing_ssid_ = ssid;
  set_mode(Mode::pairing);
  start_oobe_server();
  start_proxy();
  return net;
}

void Device::stop_pairing() {
  if (!pairing_ssid_) return;
  fabric_.unlisten(host_, wire::kOobePort);
  fabric_.unlisten(host_, kProxyPort);
  fabric_.teardown(*pairing_ssid_);
  pairing_ssid_.reset();
}

void Device::start_oobe_server() {
  netsim::serve_http(fabric_, host_, wire::kOobePort, netsim::Layer::oobe,
                     [this](const wire::HttpMessage& req, const netsim::ChannelEnd& ch, netsim::HttpResponder respond) {
    auto* net = pairing_ssid_ ? fabric_.pairing_network(*pairing_ssid_) : nullptr;
    if (!net || ch.local().address != net->device_address) {
      respond(wire::oobe_encode_response(wire::oobe_error("", "pairing network only"), 403), "403 oobe");
      return;
    }
    OobeEnvelope env;
    try {
      if (req.path != wire::kOobePath) throw Error(Errc::wrong_path, req.path);
      env = wire::oobe_decode(req);
    } catch (const Error& e) {
      respond(wire::oobe_encode_response(wire::oobe_error("", e.what()), 400), "400 oobe");
      return;
    }
    std::weak_ptr<bool> alive = alive_;
    handle_oobe(env, [respond, alive](OobeEnvelope out) {
      auto a = alive.lock();
      if (!a || !*a) return;
      bool err = wire::oobe_is_error(out);
      std::string summary = out.method + (err ? " error" : " ok");
      respond(wire::oobe_encode_response(out, err ? 400 : 200), summary);
    });
  });
}

void Device::start_proxy() {
  fabric_.listen(host_, kProxyPort, [this](netsim::ChannelEnd client) {
    auto* net = pairing_ssid_ ? fabric_.pairing_network(*pairing_ssid_) : nullptr;
    // Refusals answer the first request, then hang up.
    auto refuse = [&](const std::string& why) {
      fabric_.note(host_, "proxy refused " + client.sni() + ": " + why);
      client.on_message([client, why](const Bytes&, const netsim::MessageMeta&) mutable {
        auto resp = wire::make_http_response(502, "Bad Gateway", to_bytes(json{{"error", why}}.dump()));
        client.send(wire::http_serialize(resp), netsim::Layer::http, "502 proxy " + why);
        client.close();
      });
    };
    if (!net || client.local().address != net->device_address) return refuse("forbidden");
    if (!net->resolver.contains(client.sni())) return refuse("forbidden");
    if (!fabric_.uplink_address(host_)) return refuse("offline");
    netsim::ChannelEnd upstream;
    try {
      upstream = fabric_.open_channel(host_, {fabric_.resolve(client.sni()), kProxyPort}, true, client.sni());
    } catch (const Error& e) {
      return refuse("offline");
    }
    fabric_.note(host_, "proxy " + client.remote().str() + " -> " + client.sni());
    client.on_message([upstream](const Bytes& data, const netsim::MessageMeta& meta) mutable {
      if (upstream.is_open()) upstream.send(data, meta.layer, meta.summary);
    });
    upstream.on_message([client](const Bytes& data, const netsim::MessageMeta& meta) mutable {
      if (client.is_open()) client.send(data, meta.layer, meta.summary);
    });
    client.on_close([upstream]() mutable { upstream.close(); });
    upstream.on_close([client]() mutable { client.close(); });
  });
}

std::vector<ScanEntry> Device::scan_list() const {
  if (scan_override_) return *scan_override_;
  std::vector<ScanEntry> out;
  int signal = -40;
  // Every named, non-pairing LAN is "in radio range".
  for (const auto& lan_id : fabric_.lan_ids()) {
    const auto& lan = fabric_.lan(lan_id);
    if (lan.pairing || lan.config.ssid.empty()) continue;
    out.push_back({lan.config.ssid, signal});
    signal -= 7;
  }
  return out;
}

wire::OobeEnvelope Device::serve_oobe(const OobeEnvelope& request) {
  std::optional<OobeEnvelope> out;
  handle_oobe(request, [&out](OobeEnvelope r) { out = std::move(r); });
  if (!out) throw Error(Errc::invalid_state, request.method + " completes asynchronously");
  return *out;
}

void Device::handle_oobe(const OobeEnvelope& req, std::function<void(OobeEnvelope)> reply) {
  const std::string& m = req.method;
  if (mode_ != Mode::pairing) return reply(wire::oobe_error(m, "not in pairing mode"));
  if (m == "ping") {
    return reply({m, {{"ack", std::string(kOobeAckMarker)}, {"software_version", identity_.software_version}}});
  }
  if (m == "getDeviceDetails") {
    return reply({m,
                  {{"device_type", identity_.device_type},
                   {"serial", identity_.serial},
                   {"wifi_mac", identity_.wifi_mac},
                   {"locale", identity_.locale},
                   {"languages", json::array({identity_.locale})},
                   {"software_version", identity_.software_version},
                   {"certificate", crypto::certificate_armor(identity_.certificate)}}});
  }
  if (m == "getScanList") {
    json list = json::array();
    for (const auto& e : scan_list()) list.push_back({{"ssid", e.ssid}, {"signal", e.signal}});
    return reply({m, {{"configured", credential_.has_value()}, {"networks", list}}});
  }
  if (m == "connectToAP") {
    crypto::WifiCredential cred;
    try {
      auto blob = crypto::EncryptedCredentialBlob::dearmor(req.args.at("credential").get<std::string>());
      cred = crypto::decrypt_credential(blob, identity_.pairing.private_key);
    } catch (const std::exception&) {
      return reply(wire::oobe_error(m, "bad credential"));
    }
    try {
      connect_wifi(cred);
    } catch (const Error& e) {
      return reply({m, {{"connected", false}, {"reason", std::string(to_string(e.code()))}}});
    }
    return reply({m, {{"connected", true}, {"ssid", cred.ssid}}});
  }
  if (m == "getLinkCode") return request_link_code(std::move(reply));
  if (m == "getRegistrationState") {
    json out{{"state", std::string(to_string(reg_status_))}};
    if (grant_) out["friendly_name"] = grant_->friendly_name;
    return reply({m, out});
  }
  if (m == "setupComplete") {
    if (!grant_) return reply({m, {{"complete", false}, {"reason", "not registered"}}});
    reply({m, {{"complete", true}, {"friendly_name", grant_->friendly_name}}});
    set_mode(Mode::paired);
    std::weak_ptr<bool> alive = alive_;
    fabric_.scheduler().after(kTeardownDelayMs, [this, alive] {
      auto a = alive.lock();
      if (!a || !*a) return;
      stop_pairing();
      avs_connect();
    });
    return;
  }
  reply(wire::oobe_error(m, "unknown method"));
}

void Device::connect_wifi(const crypto::WifiCredential& cred) {
  cred.validate();
  const auto* lan = fabric_.lan_by_ssid(cred.ssid);
  if (!lan || lan->pairing) throw Error(Errc::wrong_ssid, "no network " + cred.ssid);
  if (cred.security == crypto::WifiCredential::Security::psk ? cred.passphrase != lan->config.passphrase
                                                               : !lan->config.passphrase.empty()) {
    throw Error(Errc::auth_failed, "wrong passphrase for " + cred.ssid);
  }
  if (home_lan_ && *home_lan_ != lan->config.id && fabric_.attached(host_, *home_lan_)) {
    fabric_.detach(host_, *home_lan_);
  }
  if (!fabric_.attached(host_, lan->config.id)) fabric_.attach(host_, lan->config.id);
  home_lan_ = lan->config.id;
  credential_ = cred;
  fabric_.note(host_, "joined " + cred.ssid);
}

void Device::provision(const cloud::Grant& grant) {
  if (mode_ == Mode::factory) set_mode(Mode::pairing);
  grant_ = grant;
  reg_status_ = RegStatus::registered;
  set_mode(Mode::paired);
}

// ---------------------------------------------------------------- link code

void Device::cloud_call(const std::string& op, const json& body,
                        std::function<void(std::optional<json>, std::string)> done) {
  std::string address;
  try {
    if (!fabric_.uplink_address(host_)) throw Error(Errc::offline, "no uplink");
    address = fabric_.resolve(endpoints().api);
  } catch (const Error& e) {
    std::string why = e.code() == Errc::offline ? "offline" : e.what();
    fabric_.scheduler().after(0, [done, why] { done(std::nullopt, why); });
    return;
  }
  auto req = wire::make_http_request("POST", "/" + op, to_bytes(body.dump()));
  std::weak_ptr<bool> alive = alive_;
  netsim::http_call(fabric_, host_, {address, cloud::kHttpsPort}, req,
                    {true, endpoints().api, netsim::Layer::http, "POST /" + op},
                    [done, alive](std::optional<wire::HttpMessage> resp, std::string error) {
    auto a = alive.lock();
    if (!a || !*a) return;
    if (!resp) return done(std::nullopt, error);
    json j = json::parse(resp->body_text(), nullptr, false);
    if (j.is_discarded()) return done(std::nullopt, "malformed response");
    if (resp->status != 200) return done(std::nullopt, j.value("error", std::to_string(resp->status)));
    done(std::move(j), {});
  });
}

void Device::request_link_code(std::function<void(OobeEnvelope)> reply) {
  json body{{"device_type", identity_.device_type}, {"serial", identity_.serial}, {"secret", hex_encode(identity_.secret)}};
  cloud_call("createLinkCode", body, [this, reply](std::optional<json> out, std::string error) {
    if (!out) return reply(wire::oobe_error("getLinkCode", error));
    link_code_ = out->at("code").get<std::string>();
    reg_status_ = RegStatus::pending;
    std::uint64_t generation = ++link_generation_;
    fabric_.note(host_, "link code issued, polling registration");
    reply({"getLinkCode", {{"code", *link_code_}}});
    std::weak_ptr<bool> alive = alive_;
    fabric_.scheduler().after(kLinkPollIntervalMs, [this, alive, generation] {
      if (auto a = alive.lock(); a && *a) poll_link_code(generation);
    });
  });
}

void Device::poll_link_code(std::uint64_t generation) {
  if (generation != link_generation_ || reg_status_ != RegStatus::pending || !link_code_) return;
  json body{{"serial", identity_.serial}, {"secret", hex_encode(identity_.secret)}, {"code", *link_code_}};
  cloud_call("checkLinkCode", body, [this, generation](std::optional<json> out, std::string error) {
    if (generation != link_generation_) return;
    if (out) {
      std::string state = out->value("state", "");
      if (state == "registered" && out->contains("grant")) {
        grant_ = cloud::Grant::from_json(out->at("grant"));
        reg_status_ = RegStatus::registered;
        fabric_.note(host_, "registered as " + grant_->friendly_name);
        return;
      }
      if (state == "expired") {
        reg_status_ = RegStatus::expired;
        fabric_.note(host_, "link code expired");
        return;
      }
    } else if (error == "unauthorized") {
      reg_status_ = RegStatus::expired;
      fabric_.note(host_, "link code rejected");
      return;
    }
    std::weak_ptr<bool> alive = alive_;
    fabric_.scheduler().after(kLinkPollIntervalMs, [this, alive, generation] {
      if (auto a = alive.lock(); a && *a) poll_link_code(generation);
    });
  });
}

// ---------------------------------------------------------------- AVS

json Device::make_negotiation(std::int64_t unix_time) const {
  if (!grant_) throw Error(Errc::invalid_state, "no grant");
  json claims{{"auth_token", base64_encode(grant_->auth_token)},
              {"device_type", identity_.device_type},
              {"serial", identity_.serial},
              {"timestamp", unix_time}};
  Bytes signed_bytes = to_bytes(claims.dump());
  Bytes sig = crypto::sign_detached(crypto::private_key_decode(grant_->private_key), signed_bytes);
  return {{"signed", base64_encode(signed_bytes)}, {"signature", base64_encode(sig)}};
}

void Device::avs_send(std::uint32_t stream, const wire::ControlMessage& message) {
  if (!avs_.is_open()) return;
  avs_.send(wire::frame_encode({stream, wire::control_encode(message)}), netsim::Layer::control,
            message.interface + "." + message.name);
}

void Device::avs_connect() {
  if (mode_ != Mode::paired || !grant_) throw Error(Errc::invalid_state, "avs_connect needs a paired device");
  if (avs_.is_open()) return;
  ++avs_attempts_;
  try {
    avs_ = fabric_.open_channel(host_, {fabric_.resolve(endpoints().avs), cloud::kHttpsPort}, true, endpoints().avs);
  } catch (const Error& e) {
    fabric_.note(host_, std::string("avs connect failed: ") + e.what());
    avs_schedule_retry();
    return;
  }
  avs_.on_message([this](const Bytes& data, const netsim::MessageMeta&) {
    try {
      dispatch_control(wire::control_decode(wire::frame_decode(data).data));
    } catch (const Error& e) {
      fabric_.note(host_, std::string("avs dropped frame: ") + e.what());
    }
  });
  avs_.on_close([this] {
    bool was_up = avs_up_;
    avs_up_ = false;
    fabric_.note(host_, was_up ? "avs session lost" : "avs session closed");
    avs_schedule_retry();
  });
  auto cmd = wire::make_control("System", "NegotiationCommand", make_negotiation(cloud::unix_now(fabric_)));
  last_negotiation_ = wire::frame_encode({wire::kControlStream, wire::control_encode(cmd)});
  avs_send(wire::kControlStream, cmd);
}

void Device::avs_schedule_retry() {
  if (mode_ != Mode::paired) return;
  if (avs_failures_ >= kAvsBackoffMs.size()) {
    fabric_.note(host_, "avs giving up after " + std::to_string(avs_failures_) + " retries");
    return;
  }
  auto delay = kAvsBackoffMs[avs_failures_++];
  std::weak_ptr<bool> alive = alive_;
  fabric_.scheduler().after(delay, [this, alive] {
    auto a = alive.lock();
    if (a && *a && mode_ == Mode::paired && !avs_.is_open()) avs_connect();
  });
}

void Device::dispatch_control(const wire::ControlMessage& msg) {
  if (msg.interface == "System") {
    if (msg.name == "NegotiationAccepted") {
      avs_up_ = true;
      avs_failures_ = 0;
      fabric_.note(host_, "avs session up");
      avs_send(wire::kEventStream, wire::make_control("SipClient", "ConfigureCommsRequest"));
      return;
    }
    if (msg.name == "NegotiationRejected") {
      fabric_.note(host_, "avs negotiation rejected: " + msg.payload.value("reason", std::string()));
      return;
    }
    if (msg.name == "RefreshState") {
      ++refreshes_;
      avs_send(wire::kEventStream,
               wire::make_control("System", "RefreshStateAck", {{"subsystem", msg.payload.value("subsystem", "")}}));
      return;
    }
    if (msg.name == "ExceptionEncountered") {
      fabric_.note(host_, "avs exception: " + msg.payload.value("reason", std::string()));
      return;
    }
  }
  if (msg.interface == "SipClient" && msg.name == "ConfigureComms") {
    try {
      ua_->apply_comms_config(calling::CommsConfig::from_json(msg.payload));
    } catch (const std::exception& e) {
      fabric_.note(host_, std::string("bad comms config: ") + e.what());
    }
    return;
  }
  if (ua_->handle_directive(msg)) return;
  ++unsupported_;
  fabric_.note(host_, "unsupported directive " + msg.interface + "." + msg.name);
  avs_send(wire::kEventStream, wire::make_control("System", "ExceptionEncountered",
                                                  {{"reason", "unsupported"},
                                                   {"directive", msg.interface + "." + msg.name}}));
}

void Device::send_upstream_event(const wire::ControlMessage& event) {
  if (!avs_up_) {
    fabric_.note(host_, "event " + event.interface + "." + event.name + " dropped, avs down");
    return;
  }
  avs_send(wire::kEventStream, event);
}

}  // namespace echotb::device
