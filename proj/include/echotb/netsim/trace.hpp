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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace echotb::netsim {

enum class Layer { http, oobe, sip, sdp, control, media, sys };

using echotb::to_string;
std::string_view to_string(Layer layer) noexcept;
Layer layer_from(std::string_view name);

/// One observation of a message on one LAN segment, or a node-local
/// system event (lan empty, layer sys).
struct TraceEvent {
  std::uint64_t seq = 0;
  std::uint64_t t_ms = 0;
  std::string src;
  std::string dst;
  std::string lan;
  bool secured = false;
  Layer layer = Layer::sys;
  std::string summary;
  std::optional<Bytes> payload;  // never present when secured

  bool operator==(const TraceEvent&) const = default;
};

class Trace {
 public:
  // Assigns the next sequence number. Drops the payload of secured events.
  const TraceEvent& append(TraceEvent event);

  const std::vector<TraceEvent>& events() const noexcept { return events_; }
  std::size_t size() const noexcept { return events_.size(); }

  // JSON lines: seq, t_ms, src, dst, lan, secured, layer, summary, payload_b64.
  static std::string to_json_line(const TraceEvent& event);
  std::string to_jsonl() const;
  static Trace from_jsonl(std::string_view text);
  std::string digest() const;

 private:
  std::vector<TraceEvent> events_;
};

}  // namespace echotb::netsim
