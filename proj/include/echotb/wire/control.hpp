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

#include <json.hpp>
#include <string>

namespace echotb::wire {

/// One command or event on the cloud control plane (AVS directives and the
/// SipClient interface).
struct ControlMessage {
  std::string interface;
  std::string name;
  nlohmann::json payload = nlohmann::json::object();
  bool unknown = false;  // set by decode when (interface, name) is not a documented command

  bool operator==(const ControlMessage& o) const {
    return interface == o.interface && name == o.name && payload == o.payload;
  }
};

bool control_known(std::string_view interface, std::string_view name) noexcept;

Bytes control_encode(const ControlMessage& msg);
ControlMessage control_decode(ByteView bytes);

inline ControlMessage make_control(std::string interface, std::string name,
                                   nlohmann::json payload = nlohmann::json::object()) {
  ControlMessage m{std::move(interface), std::move(name), std::move(payload)};
  m.unknown = !control_known(m.interface, m.name);
  return m;
}

}  // namespace echotb::wire
