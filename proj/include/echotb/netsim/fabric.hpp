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

#pragma once

#include "echotb/bytes.hpp"
#include "echotb/netsim/scheduler.hpp"
#include "echotb/netsim/trace.hpp"

#include <compare>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace echotb::netsim {

using HostId = std::string;
using LanId = std::string;

inline constexpr std::uint64_t kHopLatencyMs = 1;
inline constexpr std::uint64_t kRelayProcessingMs = 1;

// Well-known device address on the pairing network, then the alternates
// other models use. The client probes all of them.
inline const std::vector<std::string> kPairingDeviceAddresses = {"192.168.11.1", "192.168.11.2", "192.168.11.3"};
inline constexpr std::string_view kPairingPrefix = "192.168.11";
inline constexpr int kPairingClientPoolStart = 100;

struct Endpoint {
  std::string address;
  std::uint16_t port = 0;
  std::string str() const { return address + ":" + std::to_string(port); }
  auto operator<=>(const Endpoint&) const = default;
};

struct LanConfig {
  LanId id;
  std::string prefix;  // first three octets, e.g. "192.168.1"
  bool nat = false;    // NAT-ed home network
  bool uplink = true;  // has a path to the internet
  std::string ssid;
  std::string passphrase;
};

struct Lan {
  LanConfig config;
  std::map<int, HostId> hosts;  // host octet -> host
  bool pairing = false;
};

struct MessageMeta {
  Layer layer = Layer::sys;
  std::string summary;
};

/// Path a message takes: the LAN segments crossed, in order.
struct Route {
  std::vector<LanId> lans;
  std::string src_address;
  std::string dst_address;
  HostId dst_host;
  std::uint64_t latency_ms = 0;
};

struct Observation {
  std::uint64_t t_ms = 0;
  std::string src;
  std::string dst;
  LanId lan;
  bool secured = false;
  std::size_t length = 0;
  std::optional<Bytes> payload;  // absent for secured traffic
  std::uint64_t channel_id = 0;  // 0 for datagrams
};

class Fabric;
struct ChannelState;

/// One side of a duplex, FIFO, message-oriented channel. The secured flag
/// stands in for TLS: observers of a secured channel only learn lengths.
class ChannelEnd {
 public:
  using MessageHandler = std::function<void(const Bytes&, const MessageMeta&)>;

  ChannelEnd() = default;

  bool valid() const noexcept { return static_cast<bool>(state_); }
  bool is_open() const noexcept;
  void send(Bytes data, Layer layer, std::string summary);
  void close();
  void on_message(MessageHandler handler);
  void on_close(std::function<void()> handler);

  std::uint64_t id() const noexcept;
  bool secured() const noexcept;
  const std::string& sni() const noexcept;
  const HostId& local_host() const noexcept;
  const HostId& remote_host() const noexcept;
  const Endpoint& local() const noexcept;
  const Endpoint& remote() const noexcept;
  const Route& route() const noexcept;

 private:
  friend class Fabric;
  ChannelEnd(std::shared_ptr<ChannelState> state, int side) : state_(std::move(state)), side_(side) {}
  std::shared_ptr<ChannelState> state_;
  int side_ = 0;
};

struct PairingNetwork {
  std::string ssid;
  LanId lan;
  HostId device;
  std::string device_address;
  std::map<std::string, std::string> resolver;  // hard-wired hostname -> address
  std::vector<HostId> clients;
  bool announced = false;
  bool live = true;

  // Throws Error(not_found) for names outside the table.
  std::string resolve(const std::string& hostname) const;
};

class Fabric {
 public:
  using Acceptor = std::function<void(ChannelEnd)>;
  using DatagramHandler = std::function<void(const Bytes&, const Endpoint& from, const MessageMeta&)>;
  using TapCallback = std::function<void(const Observation&)>;

  Fabric(Scheduler& scheduler, Trace& trace) : scheduler_(scheduler), trace_(trace) {}
  Fabric(const Fabric&) = delete;
  Fabric& operator=(const Fabric&) = delete;

  Scheduler& scheduler() noexcept { return scheduler_; }
  Trace& trace() noexcept { return trace_; }
  std::uint64_t now() const noexcept { return scheduler_.now(); }

  // ---- topology
  const Lan& create_lan(LanConfig config);
  const Lan& lan(const LanId& id) const;
  bool has_lan(const LanId& id) const { return lans_.contains(id); }
  std::vector<LanId> lan_ids() const;
  const Lan* lan_by_ssid(std::string_view ssid) const;
  void add_host(const HostId& host);
  // Lowest free host octet (from 2, or the pairing client pool) unless one is given.
  std::string attach(const HostId& host, const LanId& lan, std::optional<int> octet = std::nullopt);
  void detach(const HostId& host, const LanId& lan);
  bool attached(const HostId& host, const LanId& lan) const;
  std::optional<std::string> address_of(const HostId& host, const LanId& lan) const;
  std::vector<LanId> lans_of(const HostId& host) const;
  // Address of the interface the host would use for internet traffic.
  std::optional<std::string> uplink_address(const HostId& host) const;

  std::optional<Route> route(const HostId& from, const std::string& address) const;
  bool reachable(const HostId& from, const std::string& address) const { return route(from, address).has_value(); }
  bool has_nat_mapping(const HostId& inside, const HostId& outside) const;

  // ---- names
  void register_name(const std::string& hostname, const std::string& address);
  std::string resolve(const std::string& hostname) const;

  // ---- channels
  void listen(const HostId& host, std::uint16_t port, Acceptor acceptor);
  void unlisten(const HostId& host, std::uint16_t port);
  // Throws Error(unreachable) or Error(refused).
  ChannelEnd open_channel(const HostId& from, const Endpoint& to, bool secured, std::string sni = {});

  // ---- datagrams
  void bind(const HostId& host, std::uint16_t port, DatagramHandler handler);
  void unbind(const HostId& host, std::uint16_t port);
  void send_datagram(const HostId& from, std::uint16_t from_port, const Endpoint& to, Bytes data, Layer layer,
                     std::string summary, std::uint64_t extra_delay_ms = 0);

  // ---- pairing networks
  PairingNetwork& create_pairing_network(const HostId& device, std::string ssid,
                                         const std::vector<std::string>& hardwired_names, std::size_t address_slot = 0);
  std::string join(const HostId& client, std::string_view ssid);
  void teardown(const std::string& ssid);
  PairingNetwork* pairing_network(std::string_view ssid);

  // ---- observation
  std::size_t tap_lan(const LanId& lan, const HostId& observer, TapCallback callback = {});
  std::size_t tap_channel(const ChannelEnd& channel, const HostId& observer, TapCallback callback = {});
  const std::vector<Observation>& observations(std::size_t tap) const;

  // Node-local event on the trace (layer sys unless given).
  void note(const HostId& node, std::string summary, Layer layer = Layer::sys);

 private:
  friend class ChannelEnd;
  struct Listener {
    Acceptor acceptor;
  };
  struct Tap {
    LanId lan;
    std::uint64_t channel_id = 0;  // 0 = every message on the LAN
    TapCallback callback;
    std::vector<Observation> seen;
  };

  std::string endpoint_label(const HostId& host, const Endpoint& ep) const;
  void record(const Route& route, const std::string& src, const std::string& dst, bool secured,
              const Bytes& payload, const MessageMeta& meta, std::uint64_t channel_id);
  void deliver(const std::shared_ptr<ChannelState>& state, int to_side, Bytes data, MessageMeta meta);
  void note_outbound(const HostId& from, const Route& route);
  std::uint16_t ephemeral_port(const HostId& host);

  Scheduler& scheduler_;
  Trace& trace_;
  std::map<LanId, Lan> lans_;
  std::map<HostId, std::vector<LanId>> host_lans_;  // attach order
  std::map<std::pair<HostId, std::uint16_t>, Listener> listeners_;
  std::map<std::pair<HostId, std::uint16_t>, DatagramHandler> bindings_;
  std::map<HostId, std::uint16_t> next_port_;
  std::set<std::pair<HostId, HostId>> nat_mappings_;  // (inside, outside)
  std::map<std::string, std::string> names_;
  std::map<std::string, PairingNetwork> pairing_;
  std::vector<Tap> taps_;
  std::uint64_t next_channel_id_ = 1;
};

}  // namespace echotb::netsim
