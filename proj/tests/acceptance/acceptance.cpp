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

// One line per acceptance criterion; exit status is 0 only if all pass.
#include "echotb/cloud/cloud.hpp"
#include "echotb/crypto/call_token.hpp"
#include "echotb/crypto/credential.hpp"
#include "echotb/crypto/keys.hpp"
#include "echotb/crypto/primitives.hpp"
#include "echotb/crypto/srtp.hpp"
#include "echotb/device/device.hpp"
#include "echotb/error.hpp"
#include "echotb/scenario/scenario.hpp"

#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

namespace {

using namespace echotb;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects failure reasons; the first few go into the report line.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (failures_++ < 3) reasons_ += (reasons_.empty() ? "" : "; ") + what;
  }
  Outcome done(std::string summary) const {
    if (failures_ == 0) return {true, std::move(summary)};
    return {false, reasons_ + (failures_ > 3 ? " (+" + std::to_string(failures_ - 3) + " more)" : "")};
  }

 private:
  std::size_t failures_ = 0;
  std::string reasons_;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void expect_scenario(Check& c, const std::string& name) {
  auto r = scenario::run(scenario::builtin(name));
  for (const auto& e : r.action_errors) c.expect(false, name + " action error: " + e);
  for (const auto& v : r.verdicts) c.expect(v.pass, name + ": " + scenario::describe(v));
  c.expect(!r.verdicts.empty(), name + " has no assertions");
}

Outcome pairing_conformance() {
  Check c;
  auto t0 = Clock::now();
  expect_scenario(c, "pair");
  double wall = seconds_since(t0);
  c.expect(wall < 1.0, "pair took " + std::to_string(wall) + " s");
  std::ostringstream s;
  s << "pair: OOBE order, proxied registration, paired with key/token/name in " << wall * 1000 << " ms";
  return c.done(s.str());
}

Outcome pairing_vulnerability() {
  Check c;
  for (const auto* n : {"pair_eavesdrop", "hijack_registered", "hijack_deregistered"}) expect_scenario(c, n);
  return c.done("tap gets blob and link code only; hijack blocked when pre-registered, succeeds after de-registration");
}

// A paired, online device with its cloud, for direct handshake checks.
struct OnlineDevice {
  netsim::Scheduler sched;
  netsim::Trace trace;
  netsim::Fabric fabric{sched, trace};
  crypto::SeededRng rng{0xacce55};
  cloud::Cloud cloud{fabric, rng.derive("cloud")};
  std::unique_ptr<device::Device> echo;

  OnlineDevice() {
    fabric.create_lan({"home", "192.168.1", true, true, "HomeNet", "passphrase-canary-7731"});
    auto frng = rng.derive("factory");
    auto id = device::manufacture("A3S9ZX", "G090LF7654321", frng);
    cloud.accounts().add_inventory(id.inventory());
    cloud.accounts().add_account("alice");
    cloud.accounts().preregister(id.serial, "alice");
    echo = std::make_unique<device::Device>(fabric, "echo", id, rng.derive("echo"));
    echo->connect_wifi({"HomeNet", crypto::WifiCredential::Security::psk, "passphrase-canary-7731"});
    echo->provision(cloud.accounts().issue_grant(id.serial, cloud::unix_now(fabric)));
    echo->avs_connect();
    sched.run_until_idle();
  }
};

Outcome avs_handshake() {
  Check c;
  expect_scenario(c, "avs_handshake");
  expect_scenario(c, "avs_replay");
  OnlineDevice w;
  c.expect(w.echo->avs_up(), "device did not come up");
  auto now = cloud::unix_now(w.fabric);
  auto good = w.echo->make_negotiation(now);
  try {
    w.cloud.accounts().avs_accept(good, now);
  } catch (const Error& e) {
    c.expect(false, std::string("genuine command refused: ") + e.what());
  }
  Bytes signed_bytes = base64_decode(good.at("signed").get<std::string>());
  std::mt19937_64 gen(20240601);
  std::size_t rejected = 0;
  constexpr int kFlips = 100;
  for (int i = 0; i < kFlips; ++i) {
    Bytes tampered = signed_bytes;
    std::uniform_int_distribution<std::size_t> pos(0, tampered.size() - 1);
    std::uniform_int_distribution<int> mask(1, 255);
    tampered[pos(gen)] ^= static_cast<std::uint8_t>(mask(gen));
    auto cmd = good;
    cmd["signed"] = base64_encode(tampered);
    try {
      w.cloud.accounts().avs_accept(cmd, now);
    } catch (const Error&) {
      ++rejected;
    }
  }
  c.expect(rejected == kFlips, std::to_string(kFlips - rejected) + " flipped commands accepted");
  return c.done("signed command accepted with refresh; replay outside window rejected; " + std::to_string(rejected) +
                "/" + std::to_string(kFlips) + " byte flips rejected");
}

Outcome intercom_conformance() {
  Check c;
  expect_scenario(c, "intercom_same_lan");
  return c.done("BeginCall..CallDisconnected in order, auto-answered, 0 media packets on the cloud LAN");
}

Outcome fork_semantics() {
  Check c;
  expect_scenario(c, "call_cross_lan_fork");
  return c.done("2 INVITE legs, 1 established, 1 CANCEL, media only via relay; recorded key decrypts, no key fails");
}

// Random edit that always changes the string.
std::string perturb(const std::string& uri, std::mt19937_64& gen) {
  static const std::string alphabet = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789:@.-_+;=";
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  for (;;) {
    std::string out = uri;
    std::uniform_int_distribution<std::size_t> pos(0, out.size() - 1);
    switch (std::uniform_int_distribution<int>(0, 4)(gen)) {
      case 0: out[pos(gen)] = alphabet[pick(gen)]; break;
      case 1: out.insert(out.begin() + static_cast<std::ptrdiff_t>(pos(gen)), alphabet[pick(gen)]); break;
      case 2: out.erase(pos(gen), 1); break;
      case 3: out += alphabet[pick(gen)]; break;
      default: out = out.substr(0, pos(gen)); break;
    }
    if (out != uri) return out;
  }
}

Outcome token_properties() {
  Check c;
  expect_scenario(c, "token_reuse");
  crypto::SeededRng rng(0x70c3e5);
  auto acct = crypto::keygen(rng);
  const std::string caller = cloud::device_uri_for("A0001");
  const std::string callee = cloud::device_uri_for("B0001");
  const std::int64_t now = 1'700'000'000;
  std::mt19937_64 gen(7);
  constexpr int kTrials = 10'000;
  std::size_t false_accepts = 0;
  std::size_t genuine_ok = 0;
  for (int i = 0; i < kTrials; ++i) {
    auto t = crypto::mint_call_token(acct, caller, callee, crypto::CallType::intercom, 60, now, rng);
    std::string c2 = caller;
    std::string e2 = callee;
    switch (i % 3) {
      case 0: c2 = perturb(caller, gen); break;
      case 1: e2 = perturb(callee, gen); break;
      default: std::swap(c2, e2); break;
    }
    crypto::NonceCache fresh;
    if (crypto::verify_call_token(acct.public_key, t, c2, e2, now, fresh)) ++false_accepts;
    crypto::NonceCache fresh2;
    if (crypto::verify_call_token(acct.public_key, t, caller, callee, now, fresh2)) ++genuine_ok;
  }
  c.expect(false_accepts == 0, std::to_string(false_accepts) + " false accepts");
  c.expect(genuine_ok == kTrials, "genuine token refused " + std::to_string(kTrials - genuine_ok) + " times");
  return c.done("reused token gets 403; 0 false accepts over " + std::to_string(kTrials) + " URI perturbations");
}

Outcome crypto_known_answers() {
  Check c;
  // CBC-AES256 reference vector (NIST SP 800-38A F.2.5, first two blocks),
  // confirmed with the openssl command line tool.
  auto ct = crypto::aes256_cbc_encrypt_blocks(
      hex_decode("603deb1015ca71be2b73aef0857d77811f352c073b6108d72d9810a30914dff4"),
      hex_decode("000102030405060708090a0b0c0d0e0f"),
      hex_decode("6bc1bee22e409f96e93d7e117393172aae2d8a571e03ac9c9eb76fac45af8e51"));
  c.expect(hex_encode(ct) == "f58c4c04d6e5f1ba779eabfb5f7bfbd69cfc4e967edb808d679f777bc6702c7d",
           "AES-256-CBC vector mismatch: " + hex_encode(ct));

  crypto::SeededRng rng(0xc4ed);
  auto kp = crypto::keygen(rng);
  auto cert = crypto::self_sign(kp, "G090LF0000001");
  std::mt19937_64 gen(11);
  auto text = [&](std::size_t lo, std::size_t hi) {
    std::string s(std::uniform_int_distribution<std::size_t>(lo, hi)(gen), ' ');
    for (auto& ch : s) ch = static_cast<char>(std::uniform_int_distribution<int>(0x20, 0x7e)(gen));
    return s;
  };
  constexpr int kCreds = 1000;
  int cred_ok = 0;
  for (int i = 0; i < kCreds; ++i) {
    bool open = i % 10 == 0;
    crypto::WifiCredential cred{text(1, 32), open ? crypto::WifiCredential::Security::open
                                                  : crypto::WifiCredential::Security::psk,
                                open ? "" : text(8, 63)};
    try {
      auto blob = crypto::encrypt_credential(cred, cert, rng);
      auto back = crypto::decrypt_credential(crypto::EncryptedCredentialBlob::dearmor(blob.armor()), kp.private_key);
      if (back == cred) ++cred_ok;
    } catch (const Error&) {
    }
  }
  c.expect(cred_ok == kCreds, std::to_string(kCreds - cred_ok) + " credential round-trips failed");

  constexpr int kPackets = 1000;
  Bytes master = rng.bytes(crypto::kSrtpMasterKeyLen);
  Bytes salt = rng.bytes(crypto::kSrtpMasterSaltLen);
  auto tx = crypto::srtp_derive(master, salt, 0x5eed0001);
  auto rx = crypto::srtp_derive(master, salt, 0x5eed0001);
  int rt_ok = 0;
  int replay_rejected = 0;
  for (int i = 0; i < kPackets; ++i) {
    Bytes payload = rng.bytes(1 + i % 160);
    auto pkt = tx.protect(payload, static_cast<std::uint32_t>(i) * 160);
    try {
      if (rx.unprotect(pkt) == payload) ++rt_ok;
    } catch (const Error&) {
    }
    try {
      rx.unprotect(pkt);
    } catch (const Error& e) {
      if (e.code() == Errc::replay) ++replay_rejected;
    }
  }
  c.expect(rt_ok == kPackets, std::to_string(kPackets - rt_ok) + " sRTP round-trips failed");
  c.expect(replay_rejected == kPackets, std::to_string(kPackets - replay_rejected) + " replays accepted");
  return c.done("AES-256-CBC reference vector matches; " + std::to_string(cred_ok) + " credential and " +
                std::to_string(rt_ok) + " sRTP round-trips, " + std::to_string(replay_rejected) + " replays rejected");
}

Outcome determinism() {
  Check c;
  auto t0 = Clock::now();
  auto names = scenario::builtin_names();
  for (const auto& n : names) {
    auto s = scenario::builtin(n);
    auto a = scenario::run(s);
    auto b = scenario::run(s);
    c.expect(a.trace.to_jsonl() == b.trace.to_jsonl(), n + " traces differ");
    c.expect(a.passed() && b.passed(), n + " failed its assertions");
  }
  double wall = seconds_since(t0);
  c.expect(wall < 30.0, "suite took " + std::to_string(wall) + " s");
  std::ostringstream s;
  s << names.size() << " built-ins run twice, byte-identical traces, " << wall << " s total";
  return c.done(s.str());
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"pairing conformance", pairing_conformance},
      {"pairing vulnerability", pairing_vulnerability},
      {"AVS handshake", avs_handshake},
      {"intercom conformance", intercom_conformance},
      {"fork semantics", fork_semantics},
      {"token properties", token_properties},
      {"crypto known answers", crypto_known_answers},
      {"determinism", determinism},
  };
  bool all = true;
  int n = 0;
  for (const auto& [name, fn] : criteria) {
    ++n;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    all = all && o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << n << " (" << name << "): " << o.detail << std::endl;
  }
  return all ? 0 : 1;
}
