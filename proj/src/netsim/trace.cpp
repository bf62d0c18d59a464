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

#include "echotb/netsim/trace.hpp"

#include "echotb/crypto/primitives.hpp"
#include "echotb/error.hpp"

#include <array>
#include <json.hpp>
#include <sstream>

namespace echotb::netsim {

namespace {
constexpr std::array<std::pair<Layer, std::string_view>, 7> kLayers = {{
    {Layer::http, "http"},
    {Layer::oobe, "oobe"},
    {Layer::sip, "sip"},
    {Layer::sdp, "sdp"},
    {Layer::control, "control"},
    {Layer::media, "media"},
    {Layer::sys, "sys"},
}};
}  // namespace

std::string_view to_string(Layer layer) noexcept {
  for (const auto& [l, name] : kLayers) {
    if (l == layer) return name;
  }
  return "sys";
}

Layer layer_from(std::string_view name) {
  for (const auto& [l, n] : kLayers) {
    if (n == name) return l;
  }
  throw Error(Errc::malformed, "unknown layer '" + std::string(name) + "'");
}

const TraceEvent& Trace::append(TraceEvent event) {
  event.seq = events_.size();
  if (event.secured) event.payload.reset();
  events_.push_back(std::move(event));
  return events_.back();
}

std::string Trace::to_json_line(const TraceEvent& ev) {
  // Field order is fixed so identical runs give identical bytes.
  using nlohmann::json;
  std::string out = "{\"seq\":" + std::to_string(ev.seq) + ",\"t_ms\":" + std::to_string(ev.t_ms);
  out += ",\"src\":" + json(ev.src).dump();
  out += ",\"dst\":" + json(ev.dst).dump();
  out += ",\"lan\":" + json(ev.lan).dump();
  out += std::string(",\"secured\":") + (ev.secured ? "true" : "false");
  out += ",\"layer\":" + json(std::string(to_string(ev.layer))).dump();
  out += ",\"summary\":" + json(ev.summary).dump();
  if (ev.payload && !ev.secured) out += ",\"payload_b64\":" + json(base64_encode(*ev.payload)).dump();
  out += "}";
  return out;
}

std::string Trace::to_jsonl() const {
  std::string out;
  for (const auto& ev : events_) {
    out += to_json_line(ev);
    out += '\n';
  }
  return out;
}

Trace Trace::from_jsonl(std::string_view text) {
  Trace trace;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      TraceEvent ev;
      ev.seq = j.at("seq").get<std::uint64_t>();
      ev.t_ms = j.at("t_ms").get<std::uint64_t>();
      ev.src = j.at("src").get<std::string>();
      ev.dst = j.at("dst").get<std::string>();
      ev.lan = j.at("lan").get<std::string>();
      ev.secured = j.at("secured").get<bool>();
      ev.layer = layer_from(j.at("layer").get<std::string>());
      ev.summary = j.value("summary", std::string());
      if (j.contains("payload_b64")) ev.payload = base64_decode(j.at("payload_b64").get<std::string>());
      trace.events_.push_back(std::move(ev));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::malformed, "trace line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return trace;
}

std::string Trace::digest() const { return hex_encode(crypto::sha256(to_bytes(to_jsonl()))); }

}  // namespace echotb::netsim
