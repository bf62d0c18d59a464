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

#include "echotb/wire/control.hpp"

#include "echotb/error.hpp"

#include <array>
#include <utility>

namespace echotb::wire {

namespace {
using Command = std::pair<std::string_view, std::string_view>;

constexpr std::array<Command, 20> kDocumented = {{
    {"System", "NegotiationCommand"},
    {"System", "NegotiationAccepted"},
    {"System", "NegotiationRejected"},
    {"System", "RefreshState"},
    {"System", "RefreshStateAck"},
    {"System", "ExceptionEncountered"},
    {"SipClient", "ConfigureCommsRequest"},
    {"SipClient", "ConfigureComms"},
    {"SipClient", "WarmUp"},
    {"SipClient", "BeginCall"},
    {"SipClient", "AcceptCall"},
    {"SipClient", "EndCall"},
    {"SipClient", "OutboundCallRequested"},
    {"SipClient", "OutboundCallAccepted"},
    {"SipClient", "InboundCallRinging"},
    {"SipClient", "InboundCallAccepted"},
    {"SipClient", "CallFailed"},
    {"SipClient", "CallDisconnected"},
    {"SipClient", "RegistrationStateChanged"},
    {"SipClient", "MediaStats"},
}};
}  // namespace

bool control_known(std::string_view interface, std::string_view name) noexcept {
  for (const auto& [i, n] : kDocumented)
    if (i == interface && n == name) return true;
  return false;
}

Bytes control_encode(const ControlMessage& msg) {
  std::string out = "{\"interface\":" + nlohmann::json(msg.interface).dump() +
                    ",\"name\":" + nlohmann::json(msg.name).dump() + ",\"payload\":" + msg.payload.dump() + "}";
  return to_bytes(out);
}

ControlMessage control_decode(ByteView bytes) {
  auto doc = nlohmann::json::parse(bytes.begin(), bytes.end(), nullptr, false);
  if (doc.is_discarded()) throw Error(Errc::malformed, "control message is not JSON");
  if (!doc.is_object()) throw Error(Errc::malformed, "control message must be an object");
  auto iface = doc.find("interface");
  auto name = doc.find("name");
  if (iface == doc.end() || name == doc.end() || !iface->is_string() || !name->is_string())
    throw Error(Errc::malformed, "control message needs interface and name");
  ControlMessage m;
  m.interface = iface->get<std::string>();
  m.name = name->get<std::string>();
  if (auto p = doc.find("payload"); p != doc.end()) m.payload = *p;
  m.unknown = !control_known(m.interface, m.name);
  return m;
}

}  // namespace echotb::wire
