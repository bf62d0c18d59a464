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

#include <gtest/gtest.h>

#include <random>
#include <regex>
#include <set>

namespace echotb::cloud {
namespace {

constexpr std::int64_t kNow = kEpochSeconds;

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::malformed;
}

struct Svc {
  crypto::SeededRng rng{11};
  AccountService accounts{rng.derive("accounts")};
  Bytes secret = Bytes(32, 0x5a);

  Svc() {
    accounts.add_inventory({"A3S9ZX", "G0001", secret});
    accounts.add_account("alice");
    accounts.add_account("mallory");
  }
  std::string cookie(const std::string& who) { return accounts.login(who); }
};

TEST(LinkCode, FormatAndSecretGate) {
  Svc s;
  auto code = s.accounts.create_link_code("A3S9ZX", "G0001", s.secret, kNow);
  EXPECT_TRUE(std::regex_match(code, std::regex("[A-Z0-9]{5}")));
  EXPECT_EQ(code_of([&] { s.accounts.create_link_code("A3S9ZX", "G0001", Bytes(32, 0), kNow); }), Errc::unauthorized);
  EXPECT_EQ(code_of([&] { s.accounts.create_link_code("A3S9ZX", "NOPE1", s.secret, kNow); }), Errc::unauthorized);
}

TEST(LinkCode, NewCodeExpiresOldOne) {
  Svc s;
  auto first = s.accounts.create_link_code("A3S9ZX", "G0001", s.secret, kNow);
  auto second = s.accounts.create_link_code("A3S9ZX", "G0001", s.secret, kNow);
  EXPECT_NE(first, second);
  EXPECT_EQ(s.accounts.check_link_code("G0001", s.secret, first, kNow).state, LinkState::expired);
  EXPECT_EQ(s.accounts.check_link_code("G0001", s.secret, second, kNow).state, LinkState::pending);
  EXPECT_EQ(s.accounts.live_codes(), 1u);
  EXPECT_EQ(code_of([&] { s.accounts.register_device(s.cookie("alice"), "A3S9ZX", "G0001", first, kNow); }),
            Errc::dead_code);
}

TEST(LinkCode, ExpiresAfterTtl) {
  Svc s;
  auto code = s.accounts.create_link_code("A3S9ZX", "G0001", s.secret, kNow);
  EXPECT_EQ(s.accounts.check_link_code("G0001", s.secret, code, kNow + kLinkCodeTtlSeconds + 1).state,
            LinkState::expired);
}

// Oracle: expected live-code collisions when drawing n codes uniformly from
// 36^5, computed by brute-force simulation with an unrelated generator.
double simulated_collisions(std::size_t n, int trials) {
  std::mt19937_64 gen(20240601);
  std::uniform_int_distribution<std::uint64_t> dist(0, 60466176 - 1);
  std::size_t total = 0;
  for (int t = 0; t < trials; ++t) {
    std::set<std::uint64_t> seen;
    for (std::size_t i = 0; i < n; ++i) {
      while (!seen.insert(dist(gen)).second) ++total;
    }
  }
  return static_cast<double>(total) / trials;
}

TEST(LinkCode, BirthdayBoundOnRegenerations) {
  double expected = simulated_collisions(1000, 4000);
  EXPECT_LT(expected, 1.0);
  EXPECT_NEAR(expected, 999.0 * 1000.0 / 2.0 / 60466176.0, 0.005);

  std::size_t regenerations = 0;
  constexpr int kRuns = 20;
  for (int run = 0; run < kRuns; ++run) {
    crypto::SeededRng rng(1000 + run);
    AccountService svc(rng.derive("accounts"));
    Bytes secret(32, 1);
    std::set<std::string> live;
    for (int i = 0; i < 1000; ++i) {
      std::string serial = "S" + std::to_string(i) + "000";
      svc.add_inventory({"T", serial, secret});
      EXPECT_TRUE(live.insert(svc.create_link_code("T", serial, secret, kNow)).second);
    }
    EXPECT_EQ(svc.live_codes(), 1000u);
    regenerations += svc.regenerations();
  }
  EXPECT_LT(static_cast<double>(regenerations) / kRuns, 1.0);
}

TEST(Registration, HappyPathAndIdempotentGrant) {
  Svc s;
  auto code = s.accounts.create_link_code("A3S9ZX", "G0001", s.secret, kNow);
  EXPECT_EQ(s.accounts.check_link_code("G0001", s.secret, code, kNow).state, LinkState::pending);
  EXPECT_EQ(s.accounts.register_device(s.cookie("alice"), "A3S9ZX", "G0001", code, kNow), "alice");
  auto g1 = s.accounts.check_link_code("G0001", s.secret, code, kNow);
  auto g2 = s.accounts.check_link_code("G0001", s.secret, code, kNow + 5);
  ASSERT_TRUE(g1.grant && g2.grant);
  EXPECT_EQ(*g1.grant, *g2.grant);
  EXPECT_EQ(g1.grant->friendly_name, "Echo-0001");
  EXPECT_EQ(code_of([&] { s.accounts.check_link_code("G0001", Bytes(32, 1), code, kNow); }), Errc::unauthorized);
  auto claims = crypto::open_auth_token(s.accounts.cloud_keypair(), g1.grant->auth_token);
  EXPECT_EQ(claims.account, "alice");
  EXPECT_EQ(claims.serial, "G0001");
}

TEST(Registration, BadCookieAndSerialMismatch) {
  Svc s;
  s.accounts.add_inventory({"A3S9ZX", "G0002", s.secret});
  auto code = s.accounts.create_link_code("A3S9ZX", "G0001", s.secret, kNow);
  EXPECT_EQ(code_of([&] { s.accounts.register_device("session-bogus", "A3S9ZX", "G0001", code, kNow); }),
            Errc::bad_cookie);
  EXPECT_EQ(code_of([&] { s.accounts.register_device(s.cookie("alice"), "A3S9ZX", "G0002", code, kNow); }),
            Errc::dead_code);
}

TEST(Registration, PreregisteredBlocksOtherAccount) {
  Svc s;
  s.accounts.preregister("G0001", "alice");
  auto code = s.accounts.create_link_code("A3S9ZX", "G0001", s.secret, kNow);
  EXPECT_EQ(code_of([&] { s.accounts.register_device(s.cookie("mallory"), "A3S9ZX", "G0001", code, kNow); }),
            Errc::already_registered);
  EXPECT_EQ(s.accounts.register_device(s.cookie("alice"), "A3S9ZX", "G0001", code, kNow), "alice");
  EXPECT_EQ(s.accounts.owner_of("G0001"), "alice");
}

TEST(Registration, DeregisteredDeviceCanBeTakenOver) {
  Svc s;
  s.accounts.preregister("G0001", "alice");
  s.accounts.deregister("G0001");
  auto code = s.accounts.create_link_code("A3S9ZX", "G0001", s.secret, kNow);
  EXPECT_EQ(s.accounts.register_device(s.cookie("mallory"), "A3S9ZX", "G0001", code, kNow), "mallory");
  EXPECT_EQ(s.accounts.owner_of("G0001"), "mallory");
}

TEST(Avs, AcceptWindowAndBindings) {
  Svc s;
  s.accounts.preregister("G0001", "alice");
  auto grant = s.accounts.issue_grant("G0001", kNow);
  auto make = [&](std::int64_t ts, std::string serial, const Bytes& token) {
    nlohmann::json claims{{"auth_token", base64_encode(token)}, {"device_type", "A3S9ZX"}, {"serial", serial},
                          {"timestamp", ts}};
    Bytes signed_bytes = to_bytes(claims.dump());
    auto sig = crypto::sign_detached(crypto::private_key_decode(grant.private_key), signed_bytes);
    return nlohmann::json{{"signed", base64_encode(signed_bytes)}, {"signature", base64_encode(sig)}};
  };
  auto id = s.accounts.avs_accept(make(kNow, "G0001", grant.auth_token), kNow);
  EXPECT_EQ(id.account, "alice");
  EXPECT_NO_THROW(s.accounts.avs_accept(make(kNow, "G0001", grant.auth_token), kNow + kAvsClockSkewSeconds));
  EXPECT_EQ(code_of([&] { s.accounts.avs_accept(make(kNow, "G0001", grant.auth_token), kNow + 600); }),
            Errc::unauthorized);
  EXPECT_EQ(code_of([&] { s.accounts.avs_accept(make(kNow, "G0002", grant.auth_token), kNow); }), Errc::unauthorized);
  EXPECT_EQ(code_of([&] { s.accounts.avs_accept({{"signed", "!!"}}, kNow); }), Errc::unauthorized);
}

TEST(Comms, SameAccountUriDistinctDeviceUrisStable) {
  Svc s;
  s.accounts.add_inventory({"A3S9ZX", "G0002", s.secret});
  s.accounts.preregister("G0001", "alice");
  s.accounts.preregister("G0002", "alice");
  auto a = s.accounts.configure_comms("G0001");
  auto b = s.accounts.configure_comms("G0002");
  EXPECT_EQ(a.account_uri, b.account_uri);
  EXPECT_NE(a.device_uri, b.device_uri);
  EXPECT_EQ(a, s.accounts.configure_comms("G0001"));
  EXPECT_TRUE(s.accounts.check_sip_credential(a.account_uri, a.device_uri, a.credential));
  EXPECT_FALSE(s.accounts.check_sip_credential(a.account_uri, b.device_uri, a.credential));
}

TEST(Endpoints, LocaleTable) {
  EXPECT_EQ(endpoint_set_for_locale("de"), "eu");
  EXPECT_EQ(endpoint_set_for_locale("en-GB"), "eu");
  EXPECT_EQ(endpoint_set_for_locale("en-US"), "na");
  EXPECT_EQ(hardwired_hostnames().size(), 8u);
}

TEST(Relay, DistinctPortsAndVerbatimForwarding) {
  netsim::Scheduler sched;
  netsim::Trace trace;
  netsim::Fabric fabric{sched, trace};
  crypto::SeededRng rng{3};
  Cloud cloud{fabric, rng.derive("cloud")};
  auto p1 = cloud.relay().allocate("one");
  auto p2 = cloud.relay().allocate("two");
  EXPECT_NE(p1.port, p2.port);
  fabric.create_lan({"lan", "10.0.0", false, true, "", ""});
  fabric.attach("x", "lan");
  fabric.attach("y", "lan");
  std::vector<Bytes> got;
  fabric.bind("y", 9000, [&](const Bytes& b, const netsim::Endpoint&, const netsim::MessageMeta&) { got.push_back(b); });
  fabric.send_datagram("x", 9000, p1, to_bytes("BIND"), netsim::Layer::media, "bind");
  fabric.send_datagram("y", 9000, p1, to_bytes("BIND"), netsim::Layer::media, "bind");
  sched.run_until_idle();
  Bytes pkt = {1, 2, 3, 0xff};
  fabric.send_datagram("x", 9000, p1, pkt, netsim::Layer::media, "pkt");
  sched.run_until_idle();
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0], pkt);
  EXPECT_EQ(cloud.relay().forwarded().back(), pkt);
}

TEST(Api, HttpErrorMapping) {
  netsim::Scheduler sched;
  netsim::Trace trace;
  netsim::Fabric fabric{sched, trace};
  crypto::SeededRng rng{3};
  Cloud cloud{fabric, rng.derive("cloud")};
  fabric.create_lan({"lan", "10.0.0", false, true, "", ""});
  fabric.attach("c", "lan");
  auto post = [&](const std::string& op, const std::string& body, const std::string& cookie = {}) {
    auto req = wire::make_http_request("POST", "/" + op, to_bytes(body));
    if (!cookie.empty()) req.headers.set("Cookie", "session=" + cookie);
    std::optional<wire::HttpMessage> out;
    netsim::http_call(fabric, "c", {fabric.resolve("api.amazon.test"), 443}, req, {true, "api.amazon.test"},
                      [&](std::optional<wire::HttpMessage> r, std::string) { out = r; });
    sched.run_until_idle();
    return out ? out->status : -1;
  };
  EXPECT_EQ(post("createLinkCode", R"({"device_type":"x","serial":"y","secret":"00"})"), 401);
  EXPECT_EQ(post("registerDevice", R"({"device_type":"x","serial":"y","link_code":"AAAAA"})", "nope"), 401);
  EXPECT_EQ(post("nothing", "{}"), 404);
  EXPECT_EQ(post("login", "not json"), 400);
}

}  // namespace
}  // namespace echotb::cloud
