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

#include <json.hpp>
#include <string>

namespace echotb::calling {

// SIP registration settings pushed to a device in SipClient.ConfigureComms.
struct CommsConfig {
  std::string sip_username;
  std::string registrar_domain;  // resolved through DNS to reach the registrar
  std::string credential;        // carried in X-authtoken on REGISTER
  std::string account_uri;
  std::string device_uri;

  nlohmann::json to_json() const;
  // Throws Error(malformed) on missing fields.
  static CommsConfig from_json(const nlohmann::json& j);
  bool operator==(const CommsConfig&) const = default;
};

inline constexpr std::uint16_t kRegistrarPort = 443;

}  // namespace echotb::calling
