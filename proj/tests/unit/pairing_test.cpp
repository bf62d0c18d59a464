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
#include "echotb/netsim/http_rpc.hpp"

#include <gtest/gtest.h>

namespace echotb {
namespace {

using client::SessionState;
using device::Mode;

constexpr std::string_view kPassphrase = "passphrase-canary-7731";

struct World {
  netsim::Scheduler sched;
  netsim::Trace trace;
  netsim::Fabric fabric{sched, trace};
  crypto::SeededRng rng{42};
  cloud::Cloud cloud{fabric, rng.derive("cloud")};
  std::unique_ptr<device::Device> echo;
  std::unique_ptr<client::PairingClient> phone;

  explicit World(std::string locale = "en-US") {
    fabric.create_lan({"home", "192.168.1", true, true, "HomeNet", std::string(kPassphrase)});
    fabric.create_lan({"lte", "100.64.0", true, true, "", ""});
    auto drng = rng.derive("factory");
    auto id = device::manufacture("A3S9ZX", "G090LF1234567", drng, std::move(locale));
    cloud.accounts().add_inventory(id.inventory());
    cloud.accounts().add_account("alice");
    echo = std::make_unique<device::Device>(fabric, "echo", id, rng.derive("echo"));
    phone = std::make_unique<client::PairingClient>(fabric, "phone", rng.derive("phone"));
    fabric.attach("phone", "home");
  }

  client::PairingRequest request() const {
    return {echo->pairing_ssid(), {"HomeNet", crypto::WifiCredential::Security::psk, std::string(kPassphrase)}, {}};
  }

  void pair() {
    phone->login("alice");
    sched.run_until_idle();
    echo->enter_pairing_mode();
    phone->pair(request());
    sched.run_until_idle();
  }

  std::vector<std::string> summaries(netsim::Layer layer) const {
    std::vector<std::string> out;
    for (const auto& e : trace.events()) {
      if (e.layer == layer) out.push_back(e.summary);
    }
    return out;
  }
};

bool trace_contains(const netsim::Trace& trace, std::string_view needle) {
  for (const auto& e : trace.events()) {
    if (e.payload && contains(*e.payload, to_bytes(needle))) return true;
  }
  return false;
}

TEST(Identity, PairingSsidUsesLastThreeDigits) {
  EXPECT_EQ(device::derive_pairing_ssid("AB12CD345"), "Amazon-345");
  EXPECT_EQ(device::derive_pairing_ssid("000"), "Amazon-000");
  EXPECT_THROW(device::derive_pairing_ssid("ABCDEF"), Error);
}

TEST(Pairing, FullFlowReachesPairedMode) {
  World w;
  w.pair();
  EXPECT_EQ(w.phone->state(), SessionState::done) << w.phone->failure();
  EXPECT_EQ(w.echo->mode(), Mode::paired);
  ASSERT_TRUE(w.echo->grant());
  EXPECT_EQ(w.echo->grant()->friendly_name, "Echo-4567");
  EXPECT_FALSE(w.echo->grant()->private_key.empty());
  EXPECT_FALSE(w.echo->grant()->auth_token.empty());
  EXPECT_EQ(w.phone->friendly_name(), "Echo-4567");
  EXPECT_EQ(w.cloud.accounts().owner_of("G090LF1234567"), "alice");
  EXPECT_TRUE(w.echo->avs_up());
  EXPECT_TRUE(w.fabric.attached("phone", "home"));
  EXPECT_FALSE(w.fabric.pairing_network(w.echo->pairing_ssid())->live);
}

TEST(Pairing, StatesAdvanceWithoutSkipping) {
  World w;
  w.pair();
  std::vector<SessionState> expect = {SessionState::discovering, SessionState::inspecting, SessionState::provisioning,
                                      SessionState::linking,     SessionState::registering, SessionState::awaiting,
                                      SessionState::done};
  EXPECT_EQ(w.phone->history(), expect);
}

TEST(Pairing, OobeMethodsAppearInOrder) {
  World w;
  w.pair();
  std::vector<std::string> want = {"ping", "getDeviceDetails", "getScanList", "connectToAP", "getLinkCode",
                                   "getRegistrationState", "setupComplete"};
  auto oobe = w.summaries(netsim::Layer::oobe);
  std::size_t at = 0;
  for (const auto& s : oobe) {
    if (at < want.size() && s == want[at]) ++at;
  }
  EXPECT_EQ(at, want.size());
}

TEST(Pairing, SecretsNeverInCleartext) {
  World w;
  w.pair();
  EXPECT_FALSE(trace_contains(w.trace, kPassphrase));
  EXPECT_FALSE(trace_contains(w.trace, *w.phone->cookie()));
  EXPECT_FALSE(trace_contains(w.trace, hex_encode(w.echo->identity().secret)));
  EXPECT_FALSE(trace_contains(w.trace, w.echo->grant()->private_key));
  EXPECT_TRUE(trace_contains(w.trace, *w.phone->link_code()));
}

TEST(Pairing, LocaleSelectsEndpointSet) {
  World w("de");
  w.pair();
  EXPECT_EQ(w.phone->state(), SessionState::done) << w.phone->failure();
  EXPECT_EQ(w.phone->endpoint_set_name(), "eu");
}

TEST(Pairing, DiscoveryTimesOutWithoutDevice) {
  World w;
  w.phone->login("alice");
  w.sched.run_until_idle();
  w.fabric.create_pairing_network("decoy", "Amazon-999", {}, 0);
  w.fabric.teardown("Amazon-999");
  auto& net = w.fabric.create_pairing_network("decoy2", "Amazon-998", {}, 0);
  w.fabric.detach("decoy2", net.lan);
  auto start = w.sched.now();
  w.phone->pair({"Amazon-998", {"HomeNet", crypto::WifiCredential::Security::psk, std::string(kPassphrase)}, {}});
  w.sched.run_until_idle();
  EXPECT_EQ(w.phone->state(), SessionState::failed);
  EXPECT_NE(w.phone->failure().find("timeout"), std::string::npos);
  EXPECT_EQ(w.sched.now() - start, client::kDiscoverTimeoutMs);
}

TEST(Pairing, EmptyPskFailsLocallyBeforeConnectToAp) {
  World w;
  w.phone->login("alice");
  w.sched.run_until_idle();
  w.echo->enter_pairing_mode();
  auto req = w.request();
  req.wifi.passphrase.clear();
  w.phone->pair(req);
  w.sched.run_until_idle();
  EXPECT_EQ(w.phone->state(), SessionState::failed);
  for (const auto& s : w.summaries(netsim::Layer::oobe)) EXPECT_NE(s, "connectToAP");
}

TEST(Pairing, WrongSsidReportedByDevice) {
  World w;
  w.phone->login("alice");
  w.sched.run_until_idle();
  w.echo->enter_pairing_mode();
  auto req = w.request();
  req.wifi.ssid = "NotThere";
  w.phone->pair(req);
  w.sched.run_until_idle();
  EXPECT_EQ(w.phone->state(), SessionState::failed);
  EXPECT_EQ(w.echo->mode(), Mode::pairing);
}

TEST(Device, SecondEnterPairingModeFails) {
  World w;
  w.echo->enter_pairing_mode();
  try {
    w.echo->enter_pairing_mode();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_state);
  }
}

TEST(Device, SetupCompleteWithoutGrantStaysPairing) {
  World w;
  w.echo->enter_pairing_mode();
  auto out = w.echo->serve_oobe({"setupComplete", {}});
  EXPECT_FALSE(out.args.value("complete", true));
  EXPECT_EQ(w.echo->mode(), Mode::pairing);
}

TEST(Device, UnknownOobeMethodIsError) {
  World w;
  w.echo->enter_pairing_mode();
  EXPECT_TRUE(wire::oobe_is_error(w.echo->serve_oobe({"selfDestruct", {}})));
}

TEST(Device, ConnectToApWithWrongCertificateFails) {
  World w;
  w.echo->enter_pairing_mode();
  auto other_rng = w.rng.derive("other");
  auto other = device::manufacture("A3S9ZX", "X111", other_rng);
  auto blob = crypto::encrypt_credential({"HomeNet", crypto::WifiCredential::Security::psk, std::string(kPassphrase)},
                                         other.certificate, other_rng);
  auto out = w.echo->serve_oobe({"connectToAP", {{"credential", blob.armor()}}});
  ASSERT_TRUE(wire::oobe_is_error(out));
  EXPECT_EQ(out.args["error"], "bad credential");
  EXPECT_FALSE(w.fabric.attached("echo", "home"));
}

TEST(Device, ProxyOfflineWithoutUplink) {
  World w;
  w.phone->login("alice");
  w.sched.run_until_idle();
  w.echo->enter_pairing_mode();
  w.fabric.detach("phone", "home");
  w.fabric.join("phone", w.echo->pairing_ssid());
  auto* net = w.fabric.pairing_network(w.echo->pairing_ssid());
  std::optional<wire::HttpMessage> got;
  netsim::http_call(w.fabric, "phone", {net->device_address, 443},
                    wire::make_http_request("POST", "/login", to_bytes("{}")),
                    {true, "api.amazon.test", netsim::Layer::http, "POST /login"},
                    [&](std::optional<wire::HttpMessage> r, std::string) { got = r; });
  w.sched.run_until_idle();
  ASSERT_TRUE(got);
  EXPECT_EQ(got->status, 502);
  EXPECT_NE(got->body_text().find("offline"), std::string::npos);
}

TEST(Device, ProxyRefusesNamesOutsideResolver) {
  World w;
  w.pair();
  World v;
  v.echo->enter_pairing_mode();
  v.echo->connect_wifi({"HomeNet", crypto::WifiCredential::Security::psk, std::string(kPassphrase)});
  v.fabric.detach("phone", "home");
  v.fabric.join("phone", v.echo->pairing_ssid());
  auto* net = v.fabric.pairing_network(v.echo->pairing_ssid());
  std::optional<wire::HttpMessage> got;
  netsim::http_call(v.fabric, "phone", {net->device_address, 443},
                    wire::make_http_request("POST", "/x", to_bytes("{}")),
                    {true, "evil.example", netsim::Layer::http, "POST /x"},
                    [&](std::optional<wire::HttpMessage> r, std::string) { got = r; });
  v.sched.run_until_idle();
  ASSERT_TRUE(got);
  EXPECT_EQ(got->status, 502);
}

TEST(Device, PairingTapSeesOnlyLengthsOfProxiedRegistration) {
  World w;
  w.phone->login("alice");
  w.sched.run_until_idle();
  w.echo->enter_pairing_mode();
  client::Eavesdropper eve(w.fabric, "eve", w.rng.derive("eve"));
  w.phone->pair(w.request());
  eve.join(w.echo->pairing_ssid());
  w.sched.run_until_idle();
  EXPECT_EQ(w.phone->state(), SessionState::done) << w.phone->failure();
  EXPECT_GT(eve.captured().secured_observations, 0u);
  EXPECT_TRUE(eve.captured().link_code);
  EXPECT_TRUE(eve.captured().credential_blob);
  EXPECT_EQ(eve.captured().credential_blob->find(kPassphrase), std::string::npos);
}

TEST(Device, LinkCodePollReportsExpiredAfterRegeneration) {
  World w;
  w.echo->enter_pairing_mode();
  w.echo->connect_wifi({"HomeNet", crypto::WifiCredential::Security::psk, std::string(kPassphrase)});
  std::optional<wire::OobeEnvelope> first;
  w.echo->serve_oobe({"ping", {}});
  // getLinkCode answers asynchronously; drive it through the OOBE server.
  w.fabric.detach("phone", "home");
  w.fabric.join("phone", w.echo->pairing_ssid());
  auto addr = w.fabric.pairing_network(w.echo->pairing_ssid())->device_address;
  client::oobe_call(w.fabric, "phone", addr, {"getLinkCode", {}}, [&](auto out, auto) { first = out; });
  w.sched.run_until(w.sched.now() + 100);
  ASSERT_TRUE(first);
  EXPECT_EQ(w.echo->registration(), device::RegStatus::pending);
  auto code = first->args["code"].get<std::string>();
  // Someone else asks the cloud for a new code; the old one expires.
  w.cloud.accounts().create_link_code(w.echo->identity().device_type, w.echo->identity().serial,
                                      w.echo->identity().secret, cloud::unix_now(w.fabric));
  w.sched.run_until(w.sched.now() + 5000);
  EXPECT_EQ(w.echo->registration(), device::RegStatus::expired);
}

TEST(Hijack, BlockedWhenPreregistered) {
  World w;
  w.cloud.accounts().add_account("mallory");
  w.cloud.accounts().preregister("G090LF1234567", "alice");
  w.fabric.attach("eve", "lte");
  client::Eavesdropper eve(w.fabric, "eve", w.rng.derive("eve"));
  eve.arm({"mallory", true});
  w.phone->login("alice");
  w.sched.run_until_idle();
  w.echo->enter_pairing_mode();
  w.phone->pair(w.request());
  eve.join(w.echo->pairing_ssid());
  w.sched.run_until_idle();
  ASSERT_TRUE(eve.hijack_status());
  EXPECT_EQ(*eve.hijack_status(), 403);
  EXPECT_EQ(eve.hijack_error(), "already registered");
  EXPECT_EQ(w.phone->state(), SessionState::done) << w.phone->failure();
  EXPECT_EQ(w.cloud.accounts().owner_of("G090LF1234567"), "alice");
}

TEST(Hijack, SucceedsWhenDeregistered) {
  World w;
  w.cloud.accounts().add_account("mallory");
  w.cloud.accounts().preregister("G090LF1234567", "alice");
  w.cloud.deregister("G090LF1234567");
  w.fabric.attach("eve", "lte");
  client::Eavesdropper eve(w.fabric, "eve", w.rng.derive("eve"));
  eve.arm({"mallory", true});
  w.phone->login("alice");
  w.sched.run_until_idle();
  w.echo->enter_pairing_mode();
  w.phone->pair(w.request());
  eve.join(w.echo->pairing_ssid());
  w.sched.run_until_idle();
  ASSERT_TRUE(eve.hijack_status());
  EXPECT_EQ(*eve.hijack_status(), 200);
  EXPECT_EQ(w.phone->state(), SessionState::failed);
  EXPECT_EQ(w.cloud.accounts().owner_of("G090LF1234567"), "mallory");
  EXPECT_TRUE(eve.setup_completed());
  EXPECT_EQ(w.echo->mode(), Mode::paired);
  EXPECT_TRUE(w.echo->avs_up());
}

TEST(Avs, ReplayOutsideWindowRejected) {
  World w;
  w.pair();
  ASSERT_TRUE(w.echo->avs_up());
  auto frame = w.echo->last_negotiation_frame();
  w.fabric.attach("probe", "lte");
  client::ReplayProbe probe(w.fabric, "probe");
  w.sched.after(600'000, [&] { probe.replay("avs.amazon.test", 443, frame); });
  w.sched.run_until_idle();
  ASSERT_FALSE(probe.result().received.empty());
  EXPECT_EQ(probe.result().received.front().name, "NegotiationRejected");
  EXPECT_TRUE(probe.result().closed_by_peer);
}

TEST(Avs, RefreshDirectivesAcknowledged) {
  World w;
  w.pair();
  EXPECT_EQ(w.echo->refreshes_handled(), cloud::kRefreshSubsystems.size());
  EXPECT_EQ(w.cloud.refresh_acks("G090LF1234567"), cloud::kRefreshSubsystems.size());
  EXPECT_TRUE(w.echo->ua().registration() == calling::RegState::registered);
}

TEST(Avs, UnknownDirectiveGetsUnsupported) {
  World w;
  w.pair();
  w.cloud.send_directive("G090LF1234567", wire::make_control("Speaker", "SetVolume", {{"v", 3}}));
  w.sched.run_until_idle();
  EXPECT_EQ(w.echo->unsupported_acks(), 1u);
  bool seen = false;
  for (const auto& e : w.cloud.events()) {
    if (e.message.name == "ExceptionEncountered" && e.message.payload.value("reason", "") == "unsupported") seen = true;
  }
  EXPECT_TRUE(seen);
}

TEST(Avs, EverySignedByteFlipIsRejected) {
  World w;
  w.pair();
  auto now = cloud::unix_now(w.fabric);
  auto good = w.echo->make_negotiation(now);
  EXPECT_NO_THROW(w.cloud.accounts().avs_accept(good, now));
  Bytes signed_bytes = base64_decode(good["signed"].get<std::string>());
  auto flip_rng = w.rng.derive("flips");
  for (int i = 0; i < 100; ++i) {
    Bytes tampered = signed_bytes;
    tampered[flip_rng.uniform(tampered.size())] ^= static_cast<std::uint8_t>(1 + flip_rng.uniform(255));
    auto cmd = good;
    cmd["signed"] = base64_encode(tampered);
    EXPECT_THROW(w.cloud.accounts().avs_accept(cmd, now), Error);
  }
}

TEST(Avs, BackoffIsBoundedAfterDeregistration) {
  World w;
  w.pair();
  auto before = w.echo->avs_attempts();
  w.cloud.deregister("G090LF1234567");
  w.sched.run_until_idle();
  EXPECT_FALSE(w.echo->avs_up());
  EXPECT_EQ(w.echo->avs_attempts() - before, device::kAvsBackoffMs.size());
}

}  // namespace
}  // namespace echotb
