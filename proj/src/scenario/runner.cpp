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
#include "echotb/cloud/cloud.hpp"
#include "echotb/device/device.hpp"
#include "echotb/error.hpp"
#include "echotb/scenario/scenario.hpp"

#include <map>
#include <memory>

namespace echotb::scenario {

using nlohmann::json;

namespace {

constexpr std::string_view kDefaultDeviceType = "A3S9ZX";

template <typename T>
T& find_in(std::map<std::string, std::unique_ptr<T>>& m, const std::string& key, const char* what) {
  auto it = m.find(key);
  if (it == m.end()) throw Error(Errc::not_found, std::string("no ") + what + " '" + key + "'");
  return *it->second;
}

class World {
 public:
  World(const Scenario& s, std::uint64_t seed) : scenario_(s), seed_(seed), rng_(seed, "scenario:" + s.name) {
    cloud_ = std::make_unique<cloud::Cloud>(fabric_, rng_.derive("cloud"));
  }

  RunResult run() {
    try {
      build();
    } catch (const json::exception& e) {
      throw Error(Errc::malformed, std::string("topology: ") + e.what());
    }
    for (const auto& a : scenario_.actions) {
      std::uint64_t at = a.value("at", std::uint64_t{0});
      sched_.at(at, [this, a] { execute(a); });
    }
    sched_.run_until_idle();
    RunResult r;
    r.name = scenario_.name;
    r.seed = seed_;
    r.scheduler_events = sched_.processed();
    r.end_ms = sched_.now();
    r.action_errors = errors_;
    r.verdicts = evaluate_all(trace_.events(), scenario_.assertions,
                              [this](const std::string& k, const std::string& arg) { return lookup(k, arg); });
    r.trace = std::move(trace_);
    return r;
  }

 private:
  void build() {
    const json& t = scenario_.topology;
    for (const auto& l : t.value("lans", json::array())) {
      fabric_.create_lan({l.at("id").get<std::string>(), l.at("prefix").get<std::string>(), l.value("nat", false),
                          l.value("uplink", true), l.value("ssid", ""), l.value("passphrase", "")});
    }
    auto& accounts = cloud_->accounts();
    for (const auto& a : t.value("accounts", json::array())) {
      std::optional<std::string> phone;
      if (a.contains("phone")) phone = a["phone"].get<std::string>();
      accounts.add_account(a.at("id").get<std::string>(), phone);
    }
    for (const auto& d : t.value("dropin", json::array())) {
      accounts.grant_dropin(d.at(0).get<std::string>(), d.at(1).get<std::string>());
    }
    for (const auto& d : t.value("devices", json::array())) build_device(d);
    for (const auto& c : t.value("clients", json::array())) {
      auto host = c.at("host").get<std::string>();
      clients_[host] = std::make_unique<client::PairingClient>(fabric_, host, rng_.derive("client:" + host));
      if (c.contains("lan")) fabric_.attach(host, c["lan"].get<std::string>());
    }
    for (const auto& c : t.value("attackers", json::array())) {
      auto host = c.at("host").get<std::string>();
      attackers_[host] = std::make_unique<client::Eavesdropper>(fabric_, host, rng_.derive("attacker:" + host));
      if (c.contains("lan")) fabric_.attach(host, c["lan"].get<std::string>());
    }
    for (const auto& c : t.value("probes", json::array())) {
      auto host = c.at("host").get<std::string>();
      probes_[host] = std::make_unique<client::ReplayProbe>(fabric_, host);
      if (c.contains("lan")) fabric_.attach(host, c["lan"].get<std::string>());
    }
  }

  void build_device(const json& d) {
    auto host = d.at("host").get<std::string>();
    auto serial = d.at("serial").get<std::string>();
    auto factory = rng_.derive("factory:" + serial);
    auto id = device::manufacture(d.value("type", std::string(kDefaultDeviceType)), serial, factory,
                                  d.value("locale", "en-US"));
    cloud_->accounts().add_inventory(id.inventory());
    if (d.contains("account")) cloud_->accounts().preregister(serial, d["account"].get<std::string>());
    auto dev = std::make_unique<device::Device>(fabric_, host, id, rng_.derive("device:" + host),
                                                d.value("slot", std::size_t{0}));
    if (d.value("provisioned", false)) {
      const auto& cfg = fabric_.lan(d.at("lan").get<std::string>()).config;
      auto sec = cfg.passphrase.empty() ? crypto::WifiCredential::Security::open : crypto::WifiCredential::Security::psk;
      dev->connect_wifi({cfg.ssid, sec, cfg.passphrase});
      dev->provision(cloud_->accounts().issue_grant(serial, cloud::unix_now(fabric_)));
      dev->avs_connect();
    }
    devices_[host] = std::move(dev);
  }

  device::Device& dev(const json& a, const char* key = "device") {
    return find_in(devices_, a.at(key).get<std::string>(), "device");
  }

  void execute(const json& a) {
    std::string kind = a["do"].get<std::string>();
    try {
      run_action(kind, a);
    } catch (const Error& e) {
      errors_.push_back(kind + ": " + e.what());
      fabric_.note("scenario", "action " + kind + " failed: " + e.what());
    } catch (const json::exception& e) {
      errors_.push_back(kind + ": " + e.what());
      fabric_.note("scenario", "action " + kind + " malformed: " + e.what());
    }
  }

  void run_action(const std::string& kind, const json& a) {
    if (kind == "login") {
      find_in(clients_, a["client"].get<std::string>(), "client").login(a["account"].get<std::string>());
    } else if (kind == "enter_pairing") {
      dev(a).enter_pairing_mode();
    } else if (kind == "pair") {
      const auto& w = a["wifi"];
      crypto::WifiCredential cred{w.at("ssid").get<std::string>(),
                                  w.value("security", "psk") == "open" ? crypto::WifiCredential::Security::open
                                                                       : crypto::WifiCredential::Security::psk,
                                  w.value("passphrase", "")};
      find_in(clients_, a["client"].get<std::string>(), "client").pair({dev(a).pairing_ssid(), cred, {}});
    } else if (kind == "eavesdrop") {
      find_in(attackers_, a["attacker"].get<std::string>(), "attacker").join(dev(a).pairing_ssid());
    } else if (kind == "arm_hijack") {
      find_in(attackers_, a["attacker"].get<std::string>(), "attacker")
          .arm({a["account"].get<std::string>(), a.value("complete_setup", true)});
    } else if (kind == "deregister") {
      cloud_->deregister(dev(a).identity().serial);
    } else if (kind == "begin_call") {
      auto& caller = dev(a, "caller");
      cloud::Cloud::CallRequest req;
      req.caller_serial = caller.identity().serial;
      req.type = crypto::call_type_from(a["type"].get<std::string>());
      if (a.contains("callee_device")) {
        req.callee_uri = cloud::device_uri_for(dev(a, "callee_device").identity().serial);
      } else {
        req.callee_uri = cloud::account_uri_for(a.at("callee_account").get<std::string>());
      }
      if (a.value("reuse_token", false)) {
        auto it = last_token_.find(caller.host());
        if (it == last_token_.end()) throw Error(Errc::invalid_state, "no earlier token to reuse");
        req.token = it->second;
      }
      if (a.contains("token_callee_device")) {
        req.token_callee = cloud::device_uri_for(dev(a, "token_callee_device").identity().serial);
      }
      last_token_[caller.host()] = cloud_->begin_call(req);
    } else if (kind == "accept_call") {
      cloud_->accept_call(dev(a).identity().serial);
    } else if (kind == "end_call") {
      cloud_->end_call(dev(a).identity().serial);
    } else if (kind == "talk") {
      dev(a).ua().talk(a["frames"].get<std::size_t>());
    } else if (kind == "replay_negotiation") {
      auto& d = dev(a);
      if (d.last_negotiation_frame().empty()) throw Error(Errc::invalid_state, "nothing recorded to replay");
      find_in(probes_, a["probe"].get<std::string>(), "probe")
          .replay(d.endpoints().avs, cloud::kHttpsPort, d.last_negotiation_frame());
    } else if (kind == "drop_registrar") {
      dev(a).ua().drop_connection();
    }
  }

  // Media relayed by the cloud, decrypted with the keys the registrar saw
  // in signaling versus a random key.
  std::pair<std::size_t, std::size_t> relay_decryptions() {
    std::size_t with_recorded = 0;
    std::size_t without = 0;
    auto guess_rng = rng_.derive("relay-guess");
    for (const auto& pkt : cloud_->relay().forwarded()) {
      if (pkt.size() < crypto::kSrtpHeaderLen + crypto::kSrtpTagLen) continue;
      std::uint32_t ssrc = get_u32(pkt, 8);
      for (const auto& k : cloud_->registrar().recorded_keys()) {
        if (k.ssrc != ssrc) continue;
        ByteView ks(k.key_salt);
        auto ctx = crypto::srtp_derive(ks.subspan(0, crypto::kSrtpMasterKeyLen), ks.subspan(crypto::kSrtpMasterKeyLen),
                                       ssrc);
        try {
          ctx.unprotect(pkt);
          ++with_recorded;
          break;
        } catch (const Error&) {
        }
      }
      Bytes guess = guess_rng.bytes(crypto::kSrtpMasterKeyLen + crypto::kSrtpMasterSaltLen);
      ByteView gv(guess);
      auto ctx = crypto::srtp_derive(gv.subspan(0, crypto::kSrtpMasterKeyLen), gv.subspan(crypto::kSrtpMasterKeyLen),
                                     ssrc);
      try {
        ctx.unprotect(pkt);
        ++without;
      } catch (const Error&) {
      }
    }
    return {with_recorded, without};
  }

  std::optional<std::string> lookup(const std::string& kind, const std::string& arg) {
    auto device = [&]() -> device::Device* {
      auto it = devices_.find(arg);
      return it == devices_.end() ? nullptr : it->second.get();
    };
    if (kind == "passphrase") {
      if (!fabric_.has_lan(arg)) return std::nullopt;
      return fabric_.lan(arg).config.passphrase;
    }
    if (kind == "cookie") {
      if (auto it = clients_.find(arg); it != clients_.end()) return it->second->cookie().value_or("");
      if (auto it = attackers_.find(arg); it != attackers_.end()) return it->second->cookie().value_or("");
      return std::nullopt;
    }
    if (kind == "client_state") {
      auto it = clients_.find(arg);
      if (it == clients_.end()) return std::nullopt;
      return std::string(client::to_string(it->second->state()));
    }
    if (kind == "client_failure") {
      auto it = clients_.find(arg);
      if (it == clients_.end()) return std::nullopt;
      return it->second->failure();
    }
    if (kind == "captured") {
      auto colon = arg.find(':');
      if (colon == std::string::npos) return std::nullopt;
      auto it = attackers_.find(arg.substr(0, colon));
      if (it == attackers_.end()) return std::nullopt;
      const auto& c = it->second->captured();
      auto field = arg.substr(colon + 1);
      if (field == "linkcode") return c.link_code.value_or("");
      if (field == "serial") return c.serial.value_or("");
      if (field == "blob") return c.credential_blob.value_or("");
      if (field == "blob_line") {
        // First base64 line of the armored blob; survives JSON escaping.
        const auto blob = c.credential_blob.value_or("");
        auto start = blob.find('\n');
        if (start == std::string::npos) return blob;
        auto end = blob.find('\n', start + 1);
        return blob.substr(start + 1, end == std::string::npos ? std::string::npos : end - start - 1);
      }
      if (field == "secured") return std::to_string(c.secured_observations);
      return std::nullopt;
    }
    if (kind == "hijack_status") {
      auto it = attackers_.find(arg);
      if (it == attackers_.end()) return std::nullopt;
      auto s = it->second->hijack_status();
      return s ? std::to_string(*s) : "none";
    }
    if (kind == "probe") {
      auto it = probes_.find(arg);
      if (it == probes_.end()) return std::nullopt;
      std::string out;
      for (const auto& m : it->second->result().received) out += (out.empty() ? "" : ",") + m.interface + "." + m.name;
      return out;
    }
    if (kind == "relay") {
      if (arg == "forwarded") return std::to_string(cloud_->relay().forwarded().size());
      auto [with, without] = relay_decryptions();
      if (arg == "decrypt_with_recorded") return std::to_string(with);
      if (arg == "decrypt_without_key") return std::to_string(without);
      return std::nullopt;
    }
    auto* d = device();
    if (!d) return std::nullopt;
    const auto& serial = d->identity().serial;
    if (kind == "linkcode") return d->link_code().value_or("");
    if (kind == "owner") return cloud_->accounts().owner_of(serial).value_or("none");
    if (kind == "mode") return std::string(device::to_string(d->mode()));
    if (kind == "avs_up") return d->avs_up() ? "true" : "false";
    if (kind == "refreshes") return std::to_string(d->refreshes_handled());
    if (kind == "serial") return serial;
    if (kind == "secret") return hex_encode(d->identity().secret);
    if (kind == "friendly_name") return d->grant() ? d->grant()->friendly_name : "";
    if (kind == "private_key") return d->grant() ? d->grant()->private_key : "";
    if (kind == "grant") {
      const auto& g = d->grant();
      bool full = g && !g->private_key.empty() && !g->auth_token.empty() && !g->friendly_name.empty();
      return full ? "complete" : "missing";
    }
    if (kind == "registration") return std::string(calling::to_string(d->ua().registration()));
    if (kind == "call_status" || kind == "call_path" || kind == "call_phase" || kind == "frames_received") {
      const auto* call = d->ua().call(d->ua().last_call_id());
      if (!call) return "none";
      if (kind == "call_status") return call->final_status ? std::to_string(*call->final_status) : "none";
      if (kind == "call_path") return call->path ? std::string(calling::to_string(*call->path)) : "none";
      if (kind == "call_phase") return std::string(calling::to_string(call->phase));
      std::size_t got = call->media ? call->media->stats().received : call->final_stats.received;
      return std::to_string(got);
    }
    return std::nullopt;
  }

  const Scenario& scenario_;
  std::uint64_t seed_;
  netsim::Scheduler sched_;
  netsim::Trace trace_;
  netsim::Fabric fabric_{sched_, trace_};
  crypto::SeededRng rng_;
  std::unique_ptr<cloud::Cloud> cloud_;
  std::map<std::string, std::unique_ptr<device::Device>> devices_;
  std::map<std::string, std::unique_ptr<client::PairingClient>> clients_;
  std::map<std::string, std::unique_ptr<client::Eavesdropper>> attackers_;
  std::map<std::string, std::unique_ptr<client::ReplayProbe>> probes_;
  std::map<std::string, crypto::CallAuthToken> last_token_;
  std::vector<std::string> errors_;
};

}  // namespace

RunResult run(const Scenario& s, std::optional<std::uint64_t> seed_override) {
  World world(s, seed_override.value_or(s.seed));
  return world.run();
}

}  // namespace echotb::scenario
