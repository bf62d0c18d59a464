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

#include "echotb/client/pairing_client.hpp"

#include "echotb/cloud/endpoints.hpp"
#include "echotb/error.hpp"
#include "echotb/netsim/http_rpc.hpp"

namespace echotb::client {

using nlohmann::json;
using wire::OobeEnvelope;

namespace {
constexpr std::string_view kAckMarker = "echo-oobe";
}

std::string_view to_string(SessionState s) noexcept {
  switch (s) {
    case SessionState::idle: return "idle";
    case SessionState::discovering: return "discovering";
    case SessionState::inspecting: return "inspecting";
    case SessionState::provisioning: return "provisioning";
    case SessionState::linking: return "linking";
    case SessionState::registering: return "registering";
    case SessionState::awaiting: return "awaiting";
    case SessionState::done: return "done";
    case SessionState::failed: return "failed";
  }
  return "idle";
}

void oobe_call(netsim::Fabric& fabric, const netsim::HostId& from, const std::string& address, OobeEnvelope env,
               OobeDone done) {
  std::string method = env.method;
  netsim::http_call(fabric, from, {address, wire::kOobePort}, wire::oobe_encode(env),
                    {false, "", netsim::Layer::oobe, method},
                    [done = std::move(done)](std::optional<wire::HttpMessage> resp, std::string error) {
    if (!resp) return done(std::nullopt, error);
    try {
      auto out = wire::oobe_decode_response(*resp);
      if (wire::oobe_is_error(out)) return done(std::nullopt, out.args["error"].get<std::string>());
      done(std::move(out), {});
    } catch (const Error& e) {
      done(std::nullopt, e.what());
    }
  });
}

PairingClient::PairingClient(netsim::Fabric& fabric, netsim::HostId host, crypto::SeededRng rng)
    : fabric_(fabric), host_(std::move(host)), rng_(std::move(rng)) {
  fabric_.add_host(host_);
}

PairingClient::~PairingClient() { *alive_ = false; }

void PairingClient::login(const std::string& account, std::function<void(bool)> done) {
  account_ = account;
  const auto& set = cloud::endpoint_set(endpoint_set_);
  std::string address;
  try {
    address = fabric_.resolve(set.api);
  } catch (const Error& e) {
    fabric_.note(host_, std::string("client login failed: ") + e.what());
    if (done) done(false);
    return;
  }
  auto req = wire::make_http_request("POST", "/login", to_bytes(json{{"account", account}}.dump()));
  std::weak_ptr<bool> alive = alive_;
  netsim::http_call(fabric_, host_, {address, cloud::kHttpsPort}, req, {true, set.api, netsim::Layer::http, "POST /login"},
                    [this, alive, done](std::optional<wire::HttpMessage> resp, std::string error) {
    auto a = alive.lock();
    if (!a || !*a) return;
    bool ok = resp && resp->status == 200;
    if (ok) {
      auto j = json::parse(resp->body_text(), nullptr, false);
      ok = !j.is_discarded() && j.contains("cookie");
      if (ok) cookie_ = j["cookie"].get<std::string>();
    }
    fabric_.note(host_, ok ? "client logged in as " + account_ : "client login failed: " + error);
    if (done) done(ok);
  });
}

void PairingClient::advance(SessionState next) {
  if (state_ == SessionState::failed || state_ == SessionState::done) return;
  state_ = next;
  history_.push_back(next);
  fabric_.note(host_, "client " + std::string(to_string(next)));
}

void PairingClient::fail(const std::string& why) {
  if (state_ == SessionState::failed || state_ == SessionState::done) return;
  failure_ = why;
  fabric_.note(host_, "client failed in " + std::string(to_string(state_)) + ": " + why);
  state_ = SessionState::failed;
  history_.push_back(state_);
  finish();
}

void PairingClient::finish() {
  for (const auto& lan : fabric_.lans_of(host_)) {
    if (fabric_.lan(lan).pairing) fabric_.detach(host_, lan);
  }
  for (const auto& lan : home_lans_) {
    if (fabric_.has_lan(lan) && !fabric_.attached(host_, lan)) fabric_.attach(host_, lan);
  }
  home_lans_.clear();
  if (done_) {
    auto cb = std::move(done_);
    cb(*this);
  }
}

void PairingClient::call(const std::string& method, json args, OobeDone done) {
  std::weak_ptr<bool> alive = alive_;
  oobe_call(fabric_, host_, *device_address_, {method, std::move(args)},
            [alive, done = std::move(done)](std::optional<OobeEnvelope> out, std::string error) {
    auto a = alive.lock();
    if (a && *a) done(std::move(out), std::move(error));
  });
}

void PairingClient::pair(PairingRequest request, Done done) {
  if (state_ != SessionState::idle) throw Error(Errc::invalid_state, "pairing session already used");
  request_ = std::move(request);
  if (request_.candidates.empty()) request_.candidates = netsim::kPairingDeviceAddresses;
  done_ = std::move(done);
  // A phone has one Wi-Fi radio: joining the pairing network drops the home network.
  for (const auto& lan : fabric_.lans_of(host_)) {
    if (!fabric_.lan(lan).pairing) {
      home_lans_.push_back(lan);
      fabric_.detach(host_, lan);
    }
  }
  advance(SessionState::discovering);
  try {
    fabric_.join(host_, request_.ssid);
  } catch (const Error& e) {
    return fail(e.what());
  }
  discover();
}

void PairingClient::discover() {
  struct Race {
    bool settled = false;
  };
  auto race = std::make_shared<Race>();
  std::weak_ptr<bool> alive = alive_;
  for (const auto& candidate : request_.candidates) {
    oobe_call(fabric_, host_, candidate, {"ping", json::object()},
              [this, alive, race, candidate](std::optional<OobeEnvelope> out, std::string) {
      auto a = alive.lock();
      if (!a || !*a || race->settled || !out) return;
      if (out->args.value("ack", std::string()) != kAckMarker) return;
      race->settled = true;
      device_address_ = candidate;
      fabric_.note(host_, "client discovered device at " + candidate);
      inspect();
    });
  }
  fabric_.scheduler().after(kDiscoverTimeoutMs, [this, alive, race] {
    auto a = alive.lock();
    if (!a || !*a || race->settled) return;
    race->settled = true;
    fail("timeout: no device acknowledged ping");
  });
}

void PairingClient::inspect() {
  advance(SessionState::inspecting);
  call("getDeviceDetails", json::object(), [this](std::optional<OobeEnvelope> out, std::string error) {
    if (!out) return fail(error);
    try {
      DeviceDetails d;
      const auto& a = out->args;
      d.device_type = a.at("device_type").get<std::string>();
      d.serial = a.at("serial").get<std::string>();
      d.wifi_mac = a.value("wifi_mac", "");
      d.locale = a.value("locale", "en-US");
      d.software_version = a.value("software_version", "");
      // No validation beyond parsing: the certificate is self-signed.
      d.certificate = crypto::certificate_dearmor(a.at("certificate").get<std::string>());
      details_ = std::move(d);
    } catch (const std::exception& e) {
      return fail(std::string("malformed device details: ") + e.what());
    }
    endpoint_set_ = std::string(cloud::endpoint_set_for_locale(details_->locale));
    provision_wifi();
  });
}

void PairingClient::provision_wifi() {
  advance(SessionState::provisioning);
  try {
    request_.wifi.validate();
  } catch (const Error& e) {
    return fail(e.what());
  }
  call("getScanList", json::object(), [this](std::optional<OobeEnvelope> out, std::string error) {
    if (!out) return fail(error);
    bool listed = false;
    for (const auto& n : out->args.value("networks", json::array())) {
      if (n.value("ssid", "") == request_.wifi.ssid) listed = true;
    }
    if (!listed) fabric_.note(host_, "client: " + request_.wifi.ssid + " not in scan list, trying anyway");
    std::string blob;
    try {
      blob = crypto::encrypt_credential(request_.wifi, details_->certificate, rng_).armor();
    } catch (const Error& e) {
      return fail(e.what());
    }
    call("connectToAP", {{"credential", blob}}, [this](std::optional<OobeEnvelope> out, std::string error) {
      if (!out) return fail(error);
      if (!out->args.value("connected", false)) return fail("device could not join: " + out->args.value("reason", ""));
      link_and_register();
    });
  });
}

void PairingClient::link_and_register() {
  advance(SessionState::linking);
  call("getLinkCode", json::object(), [this](std::optional<OobeEnvelope> out, std::string error) {
    if (!out) return fail(error);
    link_code_ = out->args.value("code", "");
    if (link_code_->empty()) return fail("empty link code");
    register_via_proxy();
  });
}

void PairingClient::register_via_proxy() {
  advance(SessionState::registering);
  if (!cookie_) return fail("not logged in");
  const auto& set = cloud::endpoint_set(endpoint_set_);
  auto* net = fabric_.pairing_network(request_.ssid);
  std::string address;
  try {
    if (!net) throw Error(Errc::torn_down, "pairing network gone");
    address = net->resolve(set.api);
  } catch (const Error& e) {
    return fail(e.what());
  }
  json body{{"device_type", details_->device_type}, {"serial", details_->serial}, {"link_code", *link_code_}};
  auto req = wire::make_http_request("POST", "/registerDevice", to_bytes(body.dump()));
  req.headers.set("Cookie", "session=" + *cookie_);
  std::weak_ptr<bool> alive = alive_;
  netsim::http_call(fabric_, host_, {address, cloud::kHttpsPort}, req,
                    {true, set.api, netsim::Layer::http, "POST /registerDevice"},
                    [this, alive](std::optional<wire::HttpMessage> resp, std::string error) {
    auto a = alive.lock();
    if (!a || !*a) return;
    if (!resp) return fail("registration failed: " + error);
    if (resp->status != 200) {
      auto j = json::parse(resp->body_text(), nullptr, false);
      std::string code = j.is_discarded() ? std::to_string(resp->status) : j.value("error", std::to_string(resp->status));
      return fail("registration rejected: " + code);
    }
    await_and_complete();
  });
}

void PairingClient::await_and_complete() {
  advance(SessionState::awaiting);
  await_deadline_ = fabric_.now() + kRegistrationTimeoutMs;
  poll_registration();
}

void PairingClient::poll_registration() {
  if (state_ != SessionState::awaiting) return;
  if (fabric_.now() >= await_deadline_) return fail("timeout waiting for registration");
  ++polls_;
  call("getRegistrationState", json::object(), [this](std::optional<OobeEnvelope> out, std::string error) {
    if (state_ != SessionState::awaiting) return;
    if (out && out->args.value("state", "") == "registered") {
      friendly_name_ = out->args.value("friendly_name", "");
      return complete_setup();
    }
    if (out && out->args.value("state", "") == "expired") return fail("link code expired");
    if (!out) fabric_.note(host_, "client registration poll failed: " + error);
    std::weak_ptr<bool> alive = alive_;
    fabric_.scheduler().after(kRegistrationPollMs, [this, alive] {
      if (auto a = alive.lock(); a && *a) poll_registration();
    });
  });
}

void PairingClient::complete_setup() {
  call("setupComplete", json::object(), [this](std::optional<OobeEnvelope> out, std::string error) {
    if (!out) return fail(error);
    if (!out->args.value("complete", false)) return fail("device refused setupComplete");
    advance(SessionState::done);
    fabric_.note(host_, "client paired " + details_->serial + " as " + friendly_name_.value_or(""));
    finish();
  });
}

}  // namespace echotb::client
