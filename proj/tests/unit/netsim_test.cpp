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

#include "echotb/error.hpp"
#include "echotb/netsim/fabric.hpp"

#include <gtest/gtest.h>

namespace echotb::netsim {
namespace {

struct World {
  Scheduler sched;
  Trace trace;
  Fabric fabric{sched, trace};

  World() {
    fabric.create_lan({"home-a", "192.168.1", true, true, "HomeA", "hunter2hunter2"});
    fabric.create_lan({"home-b", "192.168.2", true, true, "HomeB", "swordfish99"});
    fabric.create_lan({"cloud", "203.0.113", false, true, "", ""});
  }
};

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::malformed;
}

TEST(Scheduler, EmptyScheduleRunsNothing) {
  Scheduler s;
  EXPECT_EQ(s.run_until_idle(), 0u);
  EXPECT_EQ(s.now(), 0u);
}

TEST(Scheduler, OrdersByTimeThenInsertion) {
  Scheduler s;
  std::string order;
  s.at(5, [&] { order += "c"; });
  s.at(1, [&] { order += "a"; });
  s.at(5, [&] { order += "d"; });
  s.at(1, [&] { order += "b"; });
  EXPECT_EQ(s.run_until_idle(), 4u);
  EXPECT_EQ(order, "abcd");
  EXPECT_EQ(s.now(), 5u);
}

TEST(Scheduler, CancelledTimerDoesNotAdvanceClock) {
  Scheduler s;
  bool fired = false;
  auto h = s.after(60000, [&] { fired = true; });
  s.after(3, [] {});
  h.cancel();
  s.run_until_idle();
  EXPECT_FALSE(fired);
  EXPECT_EQ(s.now(), 3u);
}

TEST(Scheduler, BudgetGuardStopsRunaway) {
  Scheduler s(1000);
  std::function<void()> again = [&] { s.after(1, again); };
  s.after(0, again);
  EXPECT_EQ(code_of([&] { s.run_until_idle(); }), Errc::budget_exceeded);
}

TEST(Scheduler, RunUntilSetsClock) {
  Scheduler s;
  int n = 0;
  s.at(10, [&] { ++n; });
  s.at(30, [&] { ++n; });
  s.run_until(20);
  EXPECT_EQ(n, 1);
  EXPECT_EQ(s.now(), 20u);
}

TEST(Topology, LowestFreeAddress) {
  World w;
  EXPECT_EQ(w.fabric.attach("a", "home-a"), "192.168.1.2");
  EXPECT_EQ(w.fabric.attach("b", "home-a"), "192.168.1.3");
  w.fabric.detach("a", "home-a");
  EXPECT_EQ(w.fabric.attach("c", "home-a"), "192.168.1.2");
  EXPECT_EQ(w.fabric.attach("d", "home-a", 50), "192.168.1.50");
}

TEST(Topology, DuplicateAttachAndPrefixCollision) {
  World w;
  w.fabric.attach("a", "home-a");
  EXPECT_EQ(code_of([&] { w.fabric.attach("a", "home-a"); }), Errc::already_attached);
  EXPECT_EQ(code_of([&] { w.fabric.create_lan({"dup", "192.168.1", true, true, "", ""}); }),
            Errc::prefix_collision);
  EXPECT_EQ(code_of([&] { w.fabric.detach("zz", "home-a"); }), Errc::not_on_lan);
}

TEST(Channels, RefusedAndUnreachable) {
  World w;
  w.fabric.attach("a", "home-a");
  w.fabric.attach("b", "home-b");
  w.fabric.attach("srv", "cloud");
  EXPECT_EQ(code_of([&] { w.fabric.open_channel("a", {"203.0.113.2", 443}, true); }), Errc::refused);
  w.fabric.listen("b", 80, [](ChannelEnd) {});
  // b sits behind NAT and never talked to a: no inbound path.
  EXPECT_EQ(code_of([&] { w.fabric.open_channel("a", {"192.168.2.2", 80}, false); }), Errc::unreachable);
  EXPECT_EQ(code_of([&] { w.fabric.open_channel("a", {"10.9.9.9", 80}, false); }), Errc::unreachable);
}

TEST(Channels, DuplexFifoAndTrace) {
  World w;
  w.fabric.attach("a", "home-a");
  w.fabric.attach("srv", "cloud");
  std::vector<std::string> got;
  ChannelEnd server;
  w.fabric.listen("srv", 80, [&](ChannelEnd ch) {
    server = ch;
    ch.on_message([&, ch](const Bytes& b, const MessageMeta&) mutable {
      got.push_back(to_string(b));
      ch.send(to_bytes("ack " + to_string(b)), Layer::http, "ack");
    });
  });
  auto ch = w.fabric.open_channel("a", {"203.0.113.2", 80}, false);
  std::vector<std::string> replies;
  ch.on_message([&](const Bytes& b, const MessageMeta&) { replies.push_back(to_string(b)); });
  for (int i = 0; i < 5; ++i) ch.send(to_bytes(std::to_string(i)), Layer::http, "req");
  w.sched.run_until_idle();
  EXPECT_EQ(got, (std::vector<std::string>{"0", "1", "2", "3", "4"}));
  EXPECT_EQ(replies.size(), 5u);
  EXPECT_EQ(replies.front(), "ack 0");
  // Cross-LAN: one event per segment.
  ASSERT_EQ(w.trace.size(), 20u);
  EXPECT_EQ(w.trace.events()[0].lan, "home-a");
  EXPECT_EQ(w.trace.events()[1].lan, "cloud");
  EXPECT_EQ(w.trace.events()[0].t_ms, 2u);
  ASSERT_TRUE(w.trace.events()[0].payload.has_value());
}

TEST(Channels, NatMappingAllowsReturnTraffic) {
  World w;
  w.fabric.attach("a", "home-a");
  w.fabric.attach("srv", "cloud");
  w.fabric.listen("srv", 80, [](ChannelEnd) {});
  EXPECT_FALSE(w.fabric.reachable("srv", "192.168.1.2"));
  w.fabric.open_channel("a", {"203.0.113.2", 80}, false);
  EXPECT_TRUE(w.fabric.has_nat_mapping("a", "srv"));
  EXPECT_TRUE(w.fabric.reachable("srv", "192.168.1.2"));
}

TEST(Channels, SecuredChannelHidesPayload) {
  World w;
  w.fabric.attach("a", "home-a");
  w.fabric.attach("eve", "home-a");
  w.fabric.attach("srv", "cloud");
  w.fabric.listen("srv", 443, [](ChannelEnd) {});
  auto tap = w.fabric.tap_lan("home-a", "eve");
  auto ch = w.fabric.open_channel("a", {"203.0.113.2", 443}, true, "api.amazon.test");
  ch.send(to_bytes("secret-cookie"), Layer::http, "POST /registerDevice");
  w.sched.run_until_idle();
  const auto& seen = w.fabric.observations(tap);
  ASSERT_EQ(seen.size(), 1u);
  EXPECT_TRUE(seen[0].secured);
  EXPECT_EQ(seen[0].length, 13u);
  EXPECT_FALSE(seen[0].payload.has_value());
  EXPECT_EQ(w.trace.to_jsonl().find("payload_b64"), std::string::npos);
  EXPECT_EQ(code_of([&] { w.fabric.tap_lan("cloud", "eve"); }), Errc::not_on_lan);
}

TEST(Channels, CloseNotifiesPeerAfterData) {
  World w;
  w.fabric.attach("a", "home-a");
  w.fabric.attach("b", "home-a");
  std::string log;
  w.fabric.listen("b", 1, [&](ChannelEnd ch) {
    ch.on_message([&](const Bytes& m, const MessageMeta&) { log += to_string(m); });
    ch.on_close([&] { log += "|closed"; });
  });
  auto ch = w.fabric.open_channel("a", {"192.168.1.3", 1}, false);
  ch.send(to_bytes("x"), Layer::http, "x");
  ch.close();
  EXPECT_EQ(code_of([&] { ch.send(to_bytes("y"), Layer::http, "y"); }), Errc::torn_down);
  w.sched.run_until_idle();
  EXPECT_EQ(log, "x|closed");
}

TEST(Datagrams, DeliveredAndDroppedWhenUnbound) {
  World w;
  w.fabric.attach("a", "home-a");
  w.fabric.attach("b", "home-a");
  int got = 0;
  Endpoint from;
  w.fabric.bind("b", 5000, [&](const Bytes&, const Endpoint& f, const MessageMeta&) {
    ++got;
    from = f;
  });
  w.fabric.send_datagram("a", 6000, {"192.168.1.3", 5000}, Bytes(160, 1), Layer::media, "rtp");
  w.fabric.send_datagram("a", 6000, {"192.168.1.3", 5001}, Bytes(160, 1), Layer::media, "rtp");
  w.sched.run_until_idle();
  EXPECT_EQ(got, 1);
  EXPECT_EQ(from, (Endpoint{"192.168.1.2", 6000}));
  EXPECT_EQ(w.trace.size(), 2u);  // both were on the wire
}

TEST(Pairing, JoinAnnounceResolveTeardown) {
  World w;
  w.fabric.add_host("echo");
  auto& net = w.fabric.create_pairing_network("echo", "Amazon-123", {"api.amazon.test"});
  EXPECT_EQ(net.device_address, "192.168.11.1");
  EXPECT_EQ(net.resolve("api.amazon.test"), "192.168.11.1");
  EXPECT_EQ(code_of([&] { (void)net.resolve("example.org"); }), Errc::not_found);
  EXPECT_EQ(code_of([&] { w.fabric.join("phone", "Amazon-999"); }), Errc::wrong_ssid);

  std::size_t before = w.trace.size();
  EXPECT_EQ(w.fabric.join("phone", "Amazon-123"), "192.168.11.100");
  EXPECT_EQ(w.fabric.join("laptop", "Amazon-123"), "192.168.11.101");
  int announces = 0;
  for (std::size_t i = before; i < w.trace.size(); ++i) {
    if (w.trace.events()[i].summary.starts_with("announce")) ++announces;
  }
  EXPECT_EQ(announces, 1);

  // Isolated: a pairing-only client has no uplink.
  w.fabric.attach("srv", "cloud");
  EXPECT_FALSE(w.fabric.reachable("phone", "203.0.113.2"));
  EXPECT_TRUE(w.fabric.reachable("phone", "192.168.11.1"));

  w.fabric.teardown("Amazon-123");
  EXPECT_EQ(code_of([&] { w.fabric.join("tablet", "Amazon-123"); }), Errc::torn_down);
  EXPECT_FALSE(w.fabric.attached("phone", net.lan));
}

TEST(Pairing, TwoNetworksShareThePrefix) {
  World w;
  w.fabric.create_pairing_network("e1", "Amazon-111", {});
  w.fabric.create_pairing_network("e2", "Amazon-222", {}, 1);
  w.fabric.join("p1", "Amazon-111");
  w.fabric.join("p2", "Amazon-222");
  auto r = w.fabric.route("p1", "192.168.11.1");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->dst_host, "e1");
  EXPECT_FALSE(w.fabric.reachable("p2", "192.168.11.1"));
}

std::string run_chatter(std::uint64_t rounds) {
  World w;
  w.fabric.attach("a", "home-a");
  w.fabric.attach("srv", "cloud");
  w.fabric.listen("srv", 80, [](ChannelEnd ch) {
    ch.on_message([ch](const Bytes& b, const MessageMeta&) mutable { ch.send(b, Layer::http, "echo"); });
  });
  auto ch = w.fabric.open_channel("a", {"203.0.113.2", 80}, false);
  for (std::uint64_t i = 0; i < rounds; ++i) {
    w.sched.at(i * 7, [ch, i]() mutable { ch.send(to_bytes("m" + std::to_string(i)), Layer::http, "m"); });
  }
  w.sched.run_until_idle();
  return w.trace.to_jsonl();
}

TEST(Trace, DeterministicAndRoundTrips) {
  auto a = run_chatter(50);
  EXPECT_EQ(a, run_chatter(50));
  auto parsed = Trace::from_jsonl(a);
  EXPECT_EQ(parsed.to_jsonl(), a);
  EXPECT_EQ(code_of([] { Trace::from_jsonl("{\"seq\":1}\n"); }), Errc::malformed);
}

TEST(Trace, FieldOrderIsFixed) {
  TraceEvent ev{3, 9, "a@1.2.3.4:5", "b@1.2.3.5:6", "lan", false, Layer::oobe, "ping", to_bytes("hi")};
  EXPECT_EQ(Trace::to_json_line(ev),
            R"({"seq":3,"t_ms":9,"src":"a@1.2.3.4:5","dst":"b@1.2.3.5:6","lan":"lan","secured":false,)"
            R"("layer":"oobe","summary":"ping","payload_b64":"aGk="})");
}

}  // namespace
}  // namespace echotb::netsim
