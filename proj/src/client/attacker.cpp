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

#include "echotb/client/attacker.hpp"

#include "echotb/client/pairing_client.hpp"
#include "echotb/cloud/endpoints.hpp"
#include "echotb/error.hpp"
#include "echotb/netsim/http_rpc.hpp"
#include "echotb/wire/frame.hpp"
#include "echotb/wire/oobe.hpp"

namespace echotb::client {

using nlohmann::json;

namespace {
constexpr std::size_t kSetupPolls = 60;
}

Eavesdropper::Eavesdropper(netsim::Fabric& fabric, netsim::HostId host, crypto::SeededRng rng)
    : fabric_(fabric), host_(std::move(host)), rng_(std::move(rng)) {
  fabric_.add_host(host_);
}

Eavesdropper::~Eavesdropper() { *alive_ = false; }

void Eavesdropper::arm(HijackPlan plan) {
  plan_ = std::move(plan);
  const auto& set = cloud::endpoint_set("na");
  std::string address;
  try {
    address = fabric_.resolve(set.api);
  } catch (const Error& e) {
    hijack_error_ = e.what();
    return;
  }
  auto req = wire::make_http_request("POST", "/login", to_bytes(json{{"account", plan_->account}}.dump()));
  std::weak_ptr<bool> alive = alive_;
  netsim::http_call(fabric_, host_, {address, cloud::kHttpsPort}, req, {true, set.api, netsim::Layer::http, "POST /login"},
                    [this, alive](std::optional<wire::HttpMessage> resp, std::string) {
    auto a = alive.lock();
    if (!a || !*a || !resp || resp->status != 200) return;
    auto j = json::parse(resp->body_text(), nullptr, false);
    if (!j.is_discarded() && j.contains("cookie")) cookie_ = j["cookie"].get<std::string>();
  });
}

void Eavesdropper::join(const std::string& ssid) {
  ssid_ = ssid;
  fabric_.join(host_, ssid);
  auto* net = fabric_.pairing_network(ssid);
  std::weak_ptr<bool> alive = alive_;
  fabric_.tap_lan(net->lan, host_, [this, alive](const netsim::Observation& obs) {
    if (auto a = alive.lock(); a && *a) observe(obs);
  });
  fabric_.note(host_, "eavesdropper listening on " + ssid);
}

void Eavesdropper::observe(const netsim::Observation& obs) {
  if (obs.secured || !obs.payload) {
    ++captured_.secured_observations;
    captured_.secured_bytes += obs.length;
    return;
  }
  wire::HttpMessage msg;
  wire::OobeEnvelope env;
  try {
    msg = wire::http_parse(*obs.payload);
    env = msg.is_request() ? wire::oobe_decode(msg) : wire::oobe_decode_response(msg);
  } catch (const Error&) {
    return;
  }
  if (msg.is_request()) {
    captured_.methods.push_back(env.method);
    if (env.method == "connectToAP" && env.args.contains("credential")) {
      captured_.credential_blob = env.args["credential"].get<std::string>();
      fabric_.note(host_, "eavesdropper captured credential blob");
    }
    return;
  }
  if (env.method == "getDeviceDetails") {
    captured_.serial = env.args.value("serial", "");
    captured_.device_type = env.args.value("device_type", "");
    captured_.locale = env.args.value("locale", "en-US");
  } else if (env.method == "getLinkCode" && env.args.contains("code") && !captured_.link_code) {
    captured_.link_code = env.args["code"].get<std::string>();
    fabric_.note(host_, "eavesdropper captured link code " + *captured_.link_code);
    if (plan_ && !hijack_sent_) {
      std::weak_ptr<bool> alive = alive_;
      fabric_.scheduler().after(0, [this, alive] {
        if (auto a = alive.lock(); a && *a) hijack();
      });
    }
  }
}

void Eavesdropper::hijack() {
  if (!cookie_ || !captured_.serial || !captured_.link_code) {
    hijack_error_ = "missing cookie, serial or link code";
    fabric_.note(host_, "hijack aborted: " + hijack_error_);
    return;
  }
  hijack_sent_ = true;
  const auto& set = cloud::endpoint_set(cloud::endpoint_set_for_locale(captured_.locale.value_or("en-US")));
  json body{{"device_type", captured_.device_type.value_or("")},
            {"serial", *captured_.serial},
            {"link_code", *captured_.link_code}};
  auto req = wire::make_http_request("POST", "/registerDevice", to_bytes(body.dump()));
  req.headers.set("Cookie", "session=" + *cookie_);
  std::string address;
  try {
    address = fabric_.resolve(set.api);  // own uplink, not the device proxy
  } catch (const Error& e) {
    hijack_error_ = e.what();
    return;
  }
  fabric_.note(host_, "hijacker registering " + *captured_.serial + " to " + plan_->account);
  std::weak_ptr<bool> alive = alive_;
  netsim::http_call(fabric_, host_, {address, cloud::kHttpsPort}, req,
                    {true, set.api, netsim::Layer::http, "POST /registerDevice"},
                    [this, alive](std::optional<wire::HttpMessage> resp, std::string error) {
    auto a = alive.lock();
    if (!a || !*a) return;
    if (!resp) {
      hijack_error_ = error;
      return;
    }
    hijack_status_ = resp->status;
    auto j = json::parse(resp->body_text(), nullptr, false);
    if (resp->status != 200 && !j.is_discarded()) hijack_error_ = j.value("error", "");
    fabric_.note(host_, "hijack " + std::string(resp->status == 200 ? "succeeded" : "blocked: " + hijack_error_));
    if (resp->status == 200 && plan_->complete_setup) drive_setup(0);
  });
}

void Eavesdropper::drive_setup(std::size_t attempts) {
  auto* net = fabric_.pairing_network(ssid_);
  if (!net || !net->live || attempts >= kSetupPolls || !fabric_.attached(host_, net->lan)) return;
  std::weak_ptr<bool> alive = alive_;
  std::string device = net->device_address;
  oobe_call(fabric_, host_, device, {"getRegistrationState", json::object()},
            [this, alive, attempts, device](std::optional<wire::OobeEnvelope> out, std::string) {
    auto a = alive.lock();
    if (!a || !*a) return;
    if (out && out->args.value("state", "") == "registered") {
      oobe_call(fabric_, host_, device, {"setupComplete", json::object()},
                [this, alive](std::optional<wire::OobeEnvelope> done, std::string) {
        auto b = alive.lock();
        if (b && *b && done && done->args.value("complete", false)) {
          setup_completed_ = true;
          fabric_.note(host_, "hijacker completed setup");
        }
      });
      return;
    }
    fabric_.scheduler().after(kRegistrationPollMs, [this, alive, attempts] {
      if (auto b = alive.lock(); b && *b) drive_setup(attempts + 1);
    });
  });
}

ReplayProbe::ReplayProbe(netsim::Fabric& fabric, netsim::HostId host) : fabric_(fabric), host_(std::move(host)) {
  fabric_.add_host(host_);
}

ReplayProbe::~ReplayProbe() {
  *alive_ = false;
  channel_.on_message({});
  channel_.on_close({});
}

void ReplayProbe::replay(const std::string& hostname, std::uint16_t port, Bytes frame) {
  channel_ = fabric_.open_channel(host_, {fabric_.resolve(hostname), port}, true, hostname);
  channel_.on_message([this](const Bytes& data, const netsim::MessageMeta&) {
    try {
      result_.received.push_back(wire::control_decode(wire::frame_decode(data).data));
    } catch (const Error&) {
    }
  });
  channel_.on_close([this] { result_.closed_by_peer = true; });
  std::string summary = "replay";
  try {
    auto msg = wire::control_decode(wire::frame_decode(frame).data);
    summary = msg.interface + "." + msg.name;
  } catch (const Error&) {
  }
  fabric_.note(host_, "probe replaying " + summary + " to " + hostname);
  channel_.send(std::move(frame), netsim::Layer::control, summary);
}

}  // namespace echotb::client
