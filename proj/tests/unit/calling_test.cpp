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
#include "echotb/device/device.hpp"
#include "echotb/error.hpp"

#include <gtest/gtest.h>

namespace echotb {
namespace {

using calling::Phase;
using calling::PathKind;

struct CallWorld {
  netsim::Scheduler sched;
  netsim::Trace trace;
  netsim::Fabric fabric{sched, trace};
  crypto::SeededRng rng{7};
  cloud::Cloud cloud{fabric, rng.derive("cloud")};
  std::map<std::string, std::unique_ptr<device::Device>> devices;

  CallWorld() {
    fabric.create_lan({"home-a", "192.168.1", true, true, "HomeA", "alpha-passphrase"});
    fabric.create_lan({"home-b", "192.168.2", true, true, "HomeB", "bravo-passphrase"});
    cloud.accounts().add_account("alice");
    cloud.accounts().add_account("bob", "+15550100");
    cloud.accounts().add_account("carol", "+15550199");
  }

  device::Device& add(const std::string& host, const std::string& serial, const std::string& account,
                      const std::string& lan) {
    auto frng = rng.derive("factory-" + serial);
    auto id = device::manufacture("A3S9ZX", serial, frng);
    cloud.accounts().add_inventory(id.inventory());
    cloud.accounts().preregister(serial, account);
    auto& d = devices[serial] = std::make_unique<device::Device>(fabric, host, id, rng.derive(host));
    const auto& cfg = fabric.lan(lan).config;
    d->connect_wifi({cfg.ssid, crypto::WifiCredential::Security::psk, cfg.passphrase});
    d->provision(cloud.accounts().issue_grant(serial, cloud::unix_now(fabric)));
    d->avs_connect();
    return *d;
  }

  device::Device& dev(const std::string& serial) { return *devices.at(serial); }
  void settle() { sched.run_until_idle(); }

  std::size_t count(netsim::Layer layer, std::string_view prefix, std::string_view lan = {}) const {
    std::size_t n = 0;
    for (const auto& e : trace.events()) {
      if (e.layer == layer && e.summary.rfind(prefix, 0) == 0 && (lan.empty() || e.lan == lan)) ++n;
    }
    return n;
  }

  std::vector<std::string> upstream(const std::string& serial) const {
    std::vector<std::string> out;
    for (const auto& e : cloud.events()) {
      if (e.serial == serial && e.message.interface == "SipClient") out.push_back(e.message.name);
    }
    return out;
  }
};

bool subsequence(const std::vector<std::string>& seq, const std::vector<std::string>& want) {
  std::size_t at = 0;
  for (const auto& s : seq) {
    if (at < want.size() && s == want[at]) ++at;
  }
  return at == want.size();
}

TEST(Calling, DevicesRegisterWithRegistrar) {
  CallWorld w;
  w.add("echo-a", "A0001", "alice", "home-a");
  w.add("echo-b1", "B0001", "bob", "home-b");
  w.add("echo-b2", "B0002", "bob", "home-b");
  w.settle();
  for (auto* s : {"A0001", "B0001", "B0002"}) {
    EXPECT_EQ(w.dev(s).ua().registration(), calling::RegState::registered) << s;
  }
  EXPECT_EQ(w.cloud.registrar().live_bindings(cloud::account_uri_for("bob")).size(), 2u);
  EXPECT_EQ(w.dev("B0001").ua().config()->account_uri, w.dev("B0002").ua().config()->account_uri);
  EXPECT_NE(w.dev("B0001").ua().config()->device_uri, w.dev("B0002").ua().config()->device_uri);
}

TEST(Calling, ReRegisterAfterChannelDrop) {
  CallWorld w;
  w.add("echo-a", "A0001", "alice", "home-a");
  w.settle();
  w.dev("A0001").ua().drop_connection();
  w.settle();
  EXPECT_EQ(w.dev("A0001").ua().registration(), calling::RegState::registered);
  EXPECT_EQ(w.cloud.registrar().bindings().size(), 1u);
  EXPECT_GE(w.count(netsim::Layer::sip, "REGISTER"), 2u);
}

TEST(Calling, IntercomSameLanIsDirectAndAutoAnswered) {
  CallWorld w;
  w.add("echo-a", "A0001", "alice", "home-a");
  w.add("echo-b", "B0001", "bob", "home-a");
  w.cloud.accounts().grant_dropin("alice", "bob");
  w.settle();
  auto media_cloud_before = w.count(netsim::Layer::media, "", "cloud");
  w.cloud.begin_call({"A0001", cloud::device_uri_for("B0001"), crypto::CallType::intercom, {}, {}});
  w.settle();
  const auto* call = w.dev("A0001").ua().live_call();
  ASSERT_TRUE(call);
  EXPECT_EQ(call->phase, Phase::established);
  EXPECT_EQ(call->path, PathKind::direct);
  const auto* callee = w.dev("B0001").ua().live_call();
  ASSERT_TRUE(callee);
  EXPECT_TRUE(callee->intercom);
  EXPECT_EQ(callee->phase, Phase::established);

  w.dev("A0001").ua().talk(50);
  w.dev("B0001").ua().talk(50);
  w.settle();
  w.cloud.end_call("A0001");
  w.settle();
  EXPECT_EQ(w.count(netsim::Layer::media, "", "cloud"), media_cloud_before);
  const auto& a = w.dev("A0001").ua().call(call->call_id)->final_stats;
  const auto& b = w.dev("B0001").ua().call(callee->call_id)->final_stats;
  EXPECT_EQ(a.sent, 50u);
  EXPECT_EQ(a.received, 50u);
  EXPECT_EQ(b.received, 50u);
  EXPECT_TRUE(subsequence(w.upstream("A0001"), {"OutboundCallRequested", "OutboundCallAccepted", "CallDisconnected"}));
  EXPECT_TRUE(subsequence(w.upstream("B0001"), {"InboundCallAccepted", "CallDisconnected"}));
  EXPECT_EQ(w.count(netsim::Layer::sip, "BYE", "home-a"), 2u);  // caller->registrar, registrar->callee
}

TEST(Calling, IntercomWithoutGrantIsForbidden) {
  CallWorld w;
  w.add("echo-a", "A0001", "alice", "home-a");
  w.add("echo-b", "B0001", "bob", "home-a");
  w.settle();
  w.cloud.begin_call({"A0001", cloud::device_uri_for("B0001"), crypto::CallType::intercom, {}, {}});
  w.settle();
  EXPECT_FALSE(w.dev("B0001").ua().live_call());
  auto id = w.dev("A0001").ua().last_call_id();
  EXPECT_EQ(w.dev("A0001").ua().call(id)->final_status, 403);
  EXPECT_TRUE(subsequence(w.upstream("A0001"), {"OutboundCallRequested", "CallFailed"}));
}

TEST(Calling, ForkAcrossLansUsesRelayAndCancelsLoser) {
  CallWorld w;
  w.add("echo-a", "A0001", "alice", "home-a");
  w.add("echo-b1", "B0001", "bob", "home-b");
  w.add("echo-b2", "B0002", "bob", "home-b");
  w.settle();
  w.cloud.begin_call({"A0001", cloud::account_uri_for("bob"), crypto::CallType::regular, {}, {}});
  w.settle();
  EXPECT_EQ(w.dev("B0001").ua().live_call()->phase, Phase::ringing);
  EXPECT_EQ(w.dev("B0002").ua().live_call()->phase, Phase::ringing);
  w.cloud.accept_call("B0002");
  w.settle();
  auto id = w.dev("A0001").ua().last_call_id();
  EXPECT_EQ(w.cloud.registrar().legs_forwarded(id), 2u);
  EXPECT_EQ(w.cloud.registrar().cancels_sent(), 1u);
  EXPECT_EQ(w.dev("B0001").ua().live_call(), nullptr);
  const auto* lost = w.dev("B0001").ua().call(id);
  ASSERT_TRUE(lost);
  EXPECT_EQ(lost->phase, Phase::terminated);
  EXPECT_FALSE(lost->media);
  const auto* caller = w.dev("A0001").ua().live_call();
  ASSERT_TRUE(caller);
  EXPECT_EQ(caller->path, PathKind::relay);
  EXPECT_EQ(w.dev("B0002").ua().live_call()->path, PathKind::relay);

  w.dev("A0001").ua().talk(20);
  w.dev("B0002").ua().talk(20);
  w.settle();
  const auto& fwd = w.cloud.relay().forwarded();
  ASSERT_EQ(fwd.size(), 40u);

  // The relay cannot read media, the registrar's recorded key can.
  const auto* offer = &w.cloud.registrar().recorded_keys().front();
  ASSERT_EQ(offer->role, "offer");
  Bytes pkt = fwd.front();
  std::uint32_t ssrc = get_u32(pkt, 8);
  const cloud::RecordedKey* key = nullptr;
  for (const auto& k : w.cloud.registrar().recorded_keys()) {
    if (k.ssrc == ssrc) key = &k;
  }
  ASSERT_TRUE(key);
  ByteView ks(key->key_salt);
  auto ctx = crypto::srtp_derive(ks.subspan(0, 32), ks.subspan(32), ssrc);
  auto plain = ctx.unprotect(pkt);
  EXPECT_EQ(to_string(plain).rfind("media-canary-", 0), 0u);
  Bytes wrong = key->key_salt;
  wrong[0] ^= 1;
  auto bad = crypto::srtp_derive(ByteView(wrong).subspan(0, 32), ByteView(wrong).subspan(32), ssrc);
  EXPECT_THROW(bad.unprotect(pkt), Error);
  for (const auto& p : fwd) EXPECT_FALSE(contains(p, to_bytes("media-canary")));
}

TEST(Calling, DirectionsUseDistinctKeys) {
  CallWorld w;
  w.add("echo-a", "A0001", "alice", "home-a");
  w.add("echo-b", "B0001", "bob", "home-a");
  w.cloud.accounts().grant_dropin("alice", "bob");
  w.settle();
  w.cloud.begin_call({"A0001", cloud::device_uri_for("B0001"), crypto::CallType::intercom, {}, {}});
  w.settle();
  const auto* a = w.dev("A0001").ua().live_call();
  ASSERT_TRUE(a && a->remote_sdp);
  EXPECT_NE(a->local_sdp->crypto.key_salt, a->remote_sdp->crypto.key_salt);
}

TEST(Calling, PstnCallGoesToGateway) {
  CallWorld w;
  w.add("echo-a", "A0001", "alice", "home-a");
  w.settle();
  w.cloud.begin_call({"A0001", cloud::account_uri_for("carol"), crypto::CallType::regular, {}, {}});
  w.settle();
  const auto* call = w.dev("A0001").ua().live_call();
  ASSERT_TRUE(call);
  EXPECT_EQ(call->path, PathKind::gateway);
  w.dev("A0001").ua().talk(10);
  w.settle();
  EXPECT_EQ(w.cloud.gateway().frames_received(), 10u);
  EXPECT_EQ(w.cloud.gateway().answered(), 1u);
}

TEST(Calling, ReusedTokenIsRejected) {
  CallWorld w;
  w.add("echo-a", "A0001", "alice", "home-a");
  w.add("echo-b", "B0001", "bob", "home-a");
  w.cloud.accounts().grant_dropin("alice", "bob");
  w.settle();
  auto token = w.cloud.begin_call({"A0001", cloud::device_uri_for("B0001"), crypto::CallType::intercom, {}, {}});
  w.settle();
  w.cloud.end_call("A0001");
  w.settle();
  w.cloud.begin_call({"A0001", cloud::device_uri_for("B0001"), crypto::CallType::intercom, token, {}});
  w.settle();
  auto id = w.dev("A0001").ua().last_call_id();
  EXPECT_EQ(w.dev("A0001").ua().call(id)->final_status, 403);
  EXPECT_EQ(w.dev("B0001").ua().calls().size(), 1u);
}

TEST(Calling, TokenForOtherCalleeIsRejected) {
  CallWorld w;
  w.add("echo-a", "A0001", "alice", "home-a");
  w.add("echo-b", "B0001", "bob", "home-a");
  w.cloud.accounts().grant_dropin("alice", "bob");
  w.settle();
  w.cloud.begin_call(
      {"A0001", cloud::device_uri_for("B0001"), crypto::CallType::intercom, {}, cloud::device_uri_for("Z9999")});
  w.settle();
  EXPECT_EQ(w.dev("A0001").ua().call(w.dev("A0001").ua().last_call_id())->final_status, 403);
}

TEST(Calling, BusyCalleeRejectsSecondCall) {
  CallWorld w;
  w.add("echo-a", "A0001", "alice", "home-a");
  w.add("echo-b", "B0001", "bob", "home-a");
  w.add("echo-c", "C0001", "carol", "home-a");
  w.cloud.accounts().grant_dropin("alice", "bob");
  w.cloud.accounts().grant_dropin("carol", "bob");
  w.settle();
  w.cloud.begin_call({"A0001", cloud::device_uri_for("B0001"), crypto::CallType::intercom, {}, {}});
  w.settle();
  w.cloud.begin_call({"C0001", cloud::device_uri_for("B0001"), crypto::CallType::intercom, {}, {}});
  w.settle();
  EXPECT_EQ(w.dev("C0001").ua().call(w.dev("C0001").ua().last_call_id())->final_status, 486);
  EXPECT_EQ(w.dev("B0001").ua().live_call()->peer_uri, cloud::device_uri_for("A0001"));
}

TEST(Calling, BeginCallWhileEstablishedFailsLocally) {
  CallWorld w;
  w.add("echo-a", "A0001", "alice", "home-a");
  w.add("echo-b", "B0001", "bob", "home-a");
  w.cloud.accounts().grant_dropin("alice", "bob");
  w.settle();
  w.cloud.begin_call({"A0001", cloud::device_uri_for("B0001"), crypto::CallType::intercom, {}, {}});
  w.settle();
  auto invites = w.count(netsim::Layer::sip, "INVITE");
  w.cloud.begin_call({"A0001", cloud::device_uri_for("B0001"), crypto::CallType::intercom, {}, {}});
  w.settle();
  EXPECT_EQ(w.count(netsim::Layer::sip, "INVITE"), invites);
  EXPECT_EQ(w.upstream("A0001").back(), "CallFailed");
}

TEST(Calling, EndTwiceAndSendAfterEndFail) {
  CallWorld w;
  w.add("echo-a", "A0001", "alice", "home-a");
  w.add("echo-b", "B0001", "bob", "home-a");
  w.cloud.accounts().grant_dropin("alice", "bob");
  w.settle();
  w.cloud.begin_call({"A0001", cloud::device_uri_for("B0001"), crypto::CallType::intercom, {}, {}});
  w.settle();
  auto id = w.dev("A0001").ua().last_call_id();
  w.dev("A0001").ua().end_call(id);
  w.settle();
  try {
    w.dev("A0001").ua().end_call(id);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::unknown_call);
  }
  try {
    w.dev("A0001").ua().send_frame(id, calling::canary_frame("x", 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::torn_down);
  }
  EXPECT_EQ(w.dev("B0001").ua().call(id)->phase, Phase::terminated);
}

TEST(Calling, DuplicatePacketCountedAsReplay) {
  CallWorld w;
  w.add("echo-a", "A0001", "alice", "home-a");
  w.add("echo-b", "B0001", "bob", "home-a");
  w.cloud.accounts().grant_dropin("alice", "bob");
  w.settle();
  w.cloud.begin_call({"A0001", cloud::device_uri_for("B0001"), crypto::CallType::intercom, {}, {}});
  w.settle();
  auto id = w.dev("A0001").ua().last_call_id();
  w.dev("A0001").ua().send_frame(id, calling::canary_frame("echo-a", 0));
  w.settle();
  const_cast<calling::MediaSession*>(w.dev("A0001").ua().call(id)->media.get())->resend_last();
  w.settle();
  const auto& stats = w.dev("B0001").ua().call(id)->media->stats();
  EXPECT_EQ(stats.received, 1u);
  EXPECT_EQ(stats.replay_drops, 1u);
}

TEST(Calling, UnreachableCalleeGets404) {
  CallWorld w;
  w.add("echo-a", "A0001", "alice", "home-a");
  w.cloud.accounts().add_account("dave");
  w.settle();
  w.cloud.begin_call({"A0001", cloud::account_uri_for("dave"), crypto::CallType::regular, {}, {}});
  w.settle();
  EXPECT_EQ(w.dev("A0001").ua().call(w.dev("A0001").ua().last_call_id())->final_status, 404);
}

}  // namespace
}  // namespace echotb
