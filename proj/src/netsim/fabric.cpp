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

#include "echotb/netsim/fabric.hpp"

#include "echotb/error.hpp"

#include <algorithm>
#include <deque>

namespace echotb::netsim {

struct ChannelState {
  Fabric* fabric = nullptr;
  std::uint64_t id = 0;
  bool secured = false;
  std::string sni;
  HostId host[2];
  Endpoint ep[2];
  Route route;  // side 0 -> side 1
  ChannelEnd::MessageHandler handler[2];
  std::function<void()> close_handler[2];
  std::deque<std::pair<Bytes, MessageMeta>> pending[2];
  bool closed_by[2] = {false, false};
  bool open = true;
};

namespace {

struct Address {
  std::string prefix;
  int octet = 0;
};

std::optional<Address> split_address(const std::string& address) {
  auto dot = address.rfind('.');
  if (dot == std::string::npos || dot + 1 >= address.size()) return std::nullopt;
  int octet = 0;
  for (std::size_t i = dot + 1; i < address.size(); ++i) {
    if (address[i] < '0' || address[i] > '9') return std::nullopt;
    octet = octet * 10 + (address[i] - '0');
    if (octet > 255) return std::nullopt;
  }
  return Address{address.substr(0, dot), octet};
}

Route reversed(const Route& r) {
  Route out = r;
  std::reverse(out.lans.begin(), out.lans.end());
  return out;
}

}  // namespace

// ---------------------------------------------------------------- ChannelEnd

bool ChannelEnd::is_open() const noexcept { return state_ && state_->open; }

void ChannelEnd::send(Bytes data, Layer layer, std::string summary) {
  if (!state_) throw Error(Errc::invalid_state, "send on empty channel");
  if (!state_->open) throw Error(Errc::torn_down, "channel " + std::to_string(state_->id) + " is closed");
  auto state = state_;
  int to = 1 - side_;
  MessageMeta meta{layer, std::move(summary)};
  state->fabric->scheduler().after(state->route.latency_ms, [state, to, data = std::move(data), meta]() mutable {
    state->fabric->deliver(state, to, std::move(data), std::move(meta));
  });
}

void ChannelEnd::close() {
  if (!state_ || !state_->open) return;
  state_->open = false;
  state_->closed_by[side_] = true;
  auto state = state_;
  int to = 1 - side_;
  // FIN travels behind any data already in flight.
  state->fabric->scheduler().after(state->route.latency_ms, [state, to] {
    if (auto h = state->close_handler[to]) h();
  });
}

void ChannelEnd::on_message(MessageHandler handler) {
  if (!state_) return;
  state_->handler[side_] = std::move(handler);
  if (!state_->pending[side_].empty()) {
    auto state = state_;
    int side = side_;
    state->fabric->scheduler().after(0, [state, side] {
      while (!state->pending[side].empty() && state->handler[side]) {
        auto [data, meta] = std::move(state->pending[side].front());
        state->pending[side].pop_front();
        auto h = state->handler[side];
        h(data, meta);
      }
    });
  }
}

void ChannelEnd::on_close(std::function<void()> handler) {
  if (state_) state_->close_handler[side_] = std::move(handler);
}

std::uint64_t ChannelEnd::id() const noexcept { return state_ ? state_->id : 0; }
bool ChannelEnd::secured() const noexcept { return state_ && state_->secured; }

const std::string& ChannelEnd::sni() const noexcept {
  static const std::string empty;
  return state_ ? state_->sni : empty;
}

const HostId& ChannelEnd::local_host() const noexcept {
  static const HostId empty;
  return state_ ? state_->host[side_] : empty;
}

const HostId& ChannelEnd::remote_host() const noexcept {
  static const HostId empty;
  return state_ ? state_->host[1 - side_] : empty;
}

const Endpoint& ChannelEnd::local() const noexcept {
  static const Endpoint empty;
  return state_ ? state_->ep[side_] : empty;
}

const Endpoint& ChannelEnd::remote() const noexcept {
  static const Endpoint empty;
  return state_ ? state_->ep[1 - side_] : empty;
}

const Route& ChannelEnd::route() const noexcept {
  static const Route empty;
  return state_ ? state_->route : empty;
}

// ---------------------------------------------------------------- pairing

std::string PairingNetwork::resolve(const std::string& hostname) const {
  auto it = resolver.find(hostname);
  if (it == resolver.end()) throw Error(Errc::not_found, "pairing resolver has no entry for " + hostname);
  return it->second;
}

// ---------------------------------------------------------------- topology

const Lan& Fabric::create_lan(LanConfig config) {
  if (config.id.empty()) throw Error(Errc::invalid_argument, "LAN id must not be empty");
  if (lans_.contains(config.id)) throw Error(Errc::invalid_argument, "LAN '" + config.id + "' already exists");
  if (!split_address(config.prefix + ".1")) throw Error(Errc::invalid_argument, "bad prefix " + config.prefix);
  for (const auto& [id, lan] : lans_) {
    if (!lan.pairing && lan.config.prefix == config.prefix) {
      throw Error(Errc::prefix_collision, config.prefix + " already used by " + id);
    }
  }
  Lan lan;
  lan.config = std::move(config);
  auto id = lan.config.id;
  return lans_.emplace(id, std::move(lan)).first->second;
}

const Lan& Fabric::lan(const LanId& id) const {
  auto it = lans_.find(id);
  if (it == lans_.end()) throw Error(Errc::not_found, "no LAN '" + id + "'");
  return it->second;
}

std::vector<LanId> Fabric::lan_ids() const {
  std::vector<LanId> out;
  for (const auto& [id, l] : lans_) out.push_back(id);
  return out;
}

const Lan* Fabric::lan_by_ssid(std::string_view ssid) const {
  for (const auto& [id, lan] : lans_) {
    if (!lan.pairing && !ssid.empty() && lan.config.ssid == ssid) return &lan;
  }
  return nullptr;
}

void Fabric::add_host(const HostId& host) { host_lans_.try_emplace(host); }

std::string Fabric::attach(const HostId& host, const LanId& lan_id, std::optional<int> octet) {
  auto it = lans_.find(lan_id);
  if (it == lans_.end()) throw Error(Errc::not_found, "no LAN '" + lan_id + "'");
  Lan& lan = it->second;
  if (attached(host, lan_id)) throw Error(Errc::already_attached, host + " already on " + lan_id);
  int chosen = 0;
  if (octet) {
    if (*octet < 1 || *octet > 254) throw Error(Errc::invalid_argument, "host octet out of range");
    if (lan.hosts.contains(*octet)) throw Error(Errc::invalid_argument, "address in use on " + lan_id);
    chosen = *octet;
  } else {
    for (int o = lan.pairing ? kPairingClientPoolStart : 2; o <= 254; ++o) {
      if (!lan.hosts.contains(o)) {
        chosen = o;
        break;
      }
    }
    if (chosen == 0) throw Error(Errc::invalid_state, "address pool of " + lan_id + " exhausted");
  }
  lan.hosts[chosen] = host;
  host_lans_[host].push_back(lan_id);
  return lan.config.prefix + "." + std::to_string(chosen);
}

void Fabric::detach(const HostId& host, const LanId& lan_id) {
  auto it = lans_.find(lan_id);
  if (it == lans_.end() || !attached(host, lan_id)) throw Error(Errc::not_on_lan, host + " not on " + lan_id);
  std::erase_if(it->second.hosts, [&](const auto& kv) { return kv.second == host; });
  std::erase(host_lans_[host], lan_id);
}

bool Fabric::attached(const HostId& host, const LanId& lan_id) const {
  auto it = host_lans_.find(host);
  return it != host_lans_.end() && std::find(it->second.begin(), it->second.end(), lan_id) != it->second.end();
}

std::optional<std::string> Fabric::address_of(const HostId& host, const LanId& lan_id) const {
  auto it = lans_.find(lan_id);
  if (it == lans_.end()) return std::nullopt;
  for (const auto& [octet, h] : it->second.hosts) {
    if (h == host) return it->second.config.prefix + "." + std::to_string(octet);
  }
  return std::nullopt;
}

std::vector<LanId> Fabric::lans_of(const HostId& host) const {
  auto it = host_lans_.find(host);
  return it == host_lans_.end() ? std::vector<LanId>{} : it->second;
}

std::optional<std::string> Fabric::uplink_address(const HostId& host) const {
  for (const auto& id : lans_of(host)) {
    const Lan& l = lans_.at(id);
    if (l.config.uplink && !l.pairing) return address_of(host, id);
  }
  return std::nullopt;
}

std::optional<Route> Fabric::route(const HostId& from, const std::string& address) const {
  auto addr = split_address(address);
  if (!addr) return std::nullopt;
  const auto& mine = lans_of(from);
  // Same segment: no router involved.
  for (const auto& id : mine) {
    const Lan& l = lans_.at(id);
    if (l.config.prefix != addr->prefix) continue;
    auto h = l.hosts.find(addr->octet);
    if (h == l.hosts.end()) continue;
    return Route{{id}, *address_of(from, id), address, h->second, kHopLatencyMs};
  }
  const Lan* dst = nullptr;
  for (const auto& [id, l] : lans_) {
    if (!l.pairing && l.config.uplink && l.config.prefix == addr->prefix && l.hosts.contains(addr->octet)) {
      dst = &l;
      break;
    }
  }
  if (!dst) return std::nullopt;
  const Lan* src = nullptr;
  for (const auto& id : mine) {
    const Lan& l = lans_.at(id);
    if (l.config.uplink && !l.pairing) {
      src = &l;
      break;
    }
  }
  if (!src || src == dst) return std::nullopt;
  const HostId& dst_host = dst->hosts.at(addr->octet);
  if (dst->config.nat && !nat_mappings_.contains({dst_host, from})) return std::nullopt;
  return Route{{src->config.id, dst->config.id}, *address_of(from, src->config.id), address, dst_host,
               2 * kHopLatencyMs};
}

bool Fabric::has_nat_mapping(const HostId& inside, const HostId& outside) const {
  return nat_mappings_.contains({inside, outside});
}

void Fabric::note_outbound(const HostId& from, const Route& route) {
  if (route.lans.size() < 2) return;
  if (lans_.at(route.lans.front()).config.nat) nat_mappings_.insert({from, route.dst_host});
}

// ---------------------------------------------------------------- names

void Fabric::register_name(const std::string& hostname, const std::string& address) { names_[hostname] = address; }

std::string Fabric::resolve(const std::string& hostname) const {
  auto it = names_.find(hostname);
  if (it == names_.end()) throw Error(Errc::not_found, "no address for " + hostname);
  return it->second;
}

// ---------------------------------------------------------------- channels

void Fabric::listen(const HostId& host, std::uint16_t port, Acceptor acceptor) {
  listeners_[{host, port}] = Listener{std::move(acceptor)};
}

void Fabric::unlisten(const HostId& host, std::uint16_t port) { listeners_.erase({host, port}); }

std::uint16_t Fabric::ephemeral_port(const HostId& host) {
  auto [it, fresh] = next_port_.try_emplace(host, std::uint16_t{49152});
  return it->second++;
}

ChannelEnd Fabric::open_channel(const HostId& from, const Endpoint& to, bool secured, std::string sni) {
  auto r = route(from, to.address);
  if (!r) throw Error(Errc::unreachable, from + " cannot reach " + to.address);
  auto lit = listeners_.find({r->dst_host, to.port});
  if (lit == listeners_.end()) throw Error(Errc::refused, to.str() + " is not listening");
  note_outbound(from, *r);
  auto state = std::make_shared<ChannelState>();
  state->fabric = this;
  state->id = next_channel_id_++;
  state->secured = secured;
  state->sni = std::move(sni);
  state->host[0] = from;
  state->host[1] = r->dst_host;
  state->ep[0] = Endpoint{r->src_address, ephemeral_port(from)};
  state->ep[1] = to;
  state->route = *r;
  auto acceptor = lit->second.acceptor;
  acceptor(ChannelEnd(state, 1));
  return ChannelEnd(state, 0);
}

std::string Fabric::endpoint_label(const HostId& host, const Endpoint& ep) const { return host + "@" + ep.str(); }

void Fabric::deliver(const std::shared_ptr<ChannelState>& state, int to, Bytes data, MessageMeta meta) {
  int from = 1 - to;
  const Route r = from == 0 ? state->route : reversed(state->route);
  record(r, endpoint_label(state->host[from], state->ep[from]), endpoint_label(state->host[to], state->ep[to]),
         state->secured, data, meta, state->id);
  if (state->closed_by[to]) return;
  if (auto h = state->handler[to]) {
    h(data, meta);
  } else {
    state->pending[to].emplace_back(std::move(data), std::move(meta));
  }
}

void Fabric::record(const Route& r, const std::string& src, const std::string& dst, bool secured,
                    const Bytes& payload, const MessageMeta& meta, std::uint64_t channel_id) {
  for (const auto& lan_id : r.lans) {
    TraceEvent ev;
    ev.t_ms = now();
    ev.src = src;
    ev.dst = dst;
    ev.lan = lan_id;
    ev.secured = secured;
    ev.layer = meta.layer;
    ev.summary = meta.summary;
    if (!secured) ev.payload = payload;
    trace_.append(std::move(ev));

    // Callbacks may add taps; index rather than iterate.
    for (std::size_t i = 0; i < taps_.size(); ++i) {
      if (taps_[i].lan != lan_id) continue;
      if (taps_[i].channel_id != 0 && taps_[i].channel_id != channel_id) continue;
      Observation ob{now(), src, dst, lan_id, secured, payload.size(), std::nullopt, channel_id};
      if (!secured) ob.payload = payload;
      taps_[i].seen.push_back(ob);
      if (auto cb = taps_[i].callback) cb(ob);
    }
  }
}

// ---------------------------------------------------------------- datagrams

void Fabric::bind(const HostId& host, std::uint16_t port, DatagramHandler handler) {
  bindings_[{host, port}] = std::move(handler);
}

void Fabric::unbind(const HostId& host, std::uint16_t port) { bindings_.erase({host, port}); }

void Fabric::send_datagram(const HostId& from, std::uint16_t from_port, const Endpoint& to, Bytes data, Layer layer,
                           std::string summary, std::uint64_t extra_delay_ms) {
  auto r = route(from, to.address);
  if (!r) throw Error(Errc::unreachable, from + " cannot reach " + to.address);
  note_outbound(from, *r);
  Endpoint src{r->src_address, from_port};
  MessageMeta meta{layer, std::move(summary)};
  scheduler_.after(r->latency_ms + extra_delay_ms,
                   [this, from, src, to, r = *r, data = std::move(data), meta = std::move(meta)] {
                     record(r, endpoint_label(from, src), endpoint_label(r.dst_host, to), false, data, meta, 0);
                     auto it = bindings_.find({r.dst_host, to.port});
                     if (it == bindings_.end()) return;  // nobody bound: dropped
                     auto h = it->second;
                     h(data, src, meta);
                   });
}

// ---------------------------------------------------------------- pairing networks

PairingNetwork& Fabric::create_pairing_network(const HostId& device, std::string ssid,
                                               const std::vector<std::string>& hardwired_names,
                                               std::size_t address_slot) {
  if (address_slot >= kPairingDeviceAddresses.size()) throw Error(Errc::invalid_argument, "bad address slot");
  if (auto* existing = pairing_network(ssid); existing && existing->live) {
    throw Error(Errc::invalid_state, "pairing network " + ssid + " already up");
  }
  LanId lan_id = "pairing:" + device;
  if (lans_.contains(lan_id)) throw Error(Errc::invalid_state, device + " already hosts a pairing network");
  Lan lan;
  lan.config = LanConfig{lan_id, std::string(kPairingPrefix), false, false, ssid, ""};
  lan.pairing = true;
  lans_.emplace(lan_id, std::move(lan));
  auto octet = split_address(kPairingDeviceAddresses[address_slot])->octet;
  PairingNetwork net;
  net.ssid = ssid;
  net.lan = lan_id;
  net.device = device;
  net.device_address = attach(device, lan_id, octet);
  for (const auto& name : hardwired_names) net.resolver[name] = net.device_address;
  auto& slot = pairing_[ssid];
  slot = std::move(net);
  note(device, "pairing network " + ssid + " up at " + slot.device_address);
  return slot;
}

PairingNetwork* Fabric::pairing_network(std::string_view ssid) {
  auto it = pairing_.find(std::string(ssid));
  return it == pairing_.end() ? nullptr : &it->second;
}

std::string Fabric::join(const HostId& client, std::string_view ssid) {
  auto* net = pairing_network(ssid);
  if (!net) throw Error(Errc::wrong_ssid, "no network named " + std::string(ssid));
  if (!net->live) throw Error(Errc::torn_down, "pairing network " + net->ssid + " was torn down");
  std::string addr = attach(client, net->lan);
  net->clients.push_back(client);
  if (!net->announced) {
    net->announced = true;
    note(net->device, "announce first client " + client + " on " + net->ssid);
  }
  return addr;
}

void Fabric::teardown(const std::string& ssid) {
  auto* net = pairing_network(ssid);
  if (!net || !net->live) return;
  auto& hosts = lans_.at(net->lan).hosts;
  std::vector<HostId> members;
  for (const auto& [o, h] : hosts) members.push_back(h);
  for (const auto& h : members) std::erase(host_lans_[h], net->lan);
  lans_.erase(net->lan);
  net->live = false;
  note(net->device, "pairing network " + ssid + " down");
}

// ---------------------------------------------------------------- observation

std::size_t Fabric::tap_lan(const LanId& lan_id, const HostId& observer, TapCallback callback) {
  if (!attached(observer, lan_id)) throw Error(Errc::not_on_lan, observer + " cannot observe " + lan_id);
  taps_.push_back(Tap{lan_id, 0, std::move(callback), {}});
  return taps_.size() - 1;
}

std::size_t Fabric::tap_channel(const ChannelEnd& channel, const HostId& observer, TapCallback callback) {
  for (const auto& lan_id : channel.route().lans) {
    if (attached(observer, lan_id)) {
      taps_.push_back(Tap{lan_id, channel.id(), std::move(callback), {}});
      return taps_.size() - 1;
    }
  }
  throw Error(Errc::not_on_lan, observer + " is not on any segment of channel " + std::to_string(channel.id()));
}

const std::vector<Observation>& Fabric::observations(std::size_t tap) const {
  if (tap >= taps_.size()) throw Error(Errc::invalid_argument, "no tap " + std::to_string(tap));
  return taps_.at(tap).seen;
}

void Fabric::note(const HostId& node, std::string summary, Layer layer) {
  TraceEvent ev;
  ev.t_ms = now();
  ev.src = node;
  ev.layer = layer;
  ev.summary = std::move(summary);
  trace_.append(std::move(ev));
}

}  // namespace echotb::netsim
