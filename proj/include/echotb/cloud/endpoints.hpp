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

#include "echotb/netsim/fabric.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace echotb::cloud {

// Virtual wall clock: t_ms = 0 corresponds to this unix time.
inline constexpr std::int64_t kEpochSeconds = 1'700'000'000;
inline std::int64_t unix_now(const netsim::Fabric& fabric) {
  return kEpochSeconds + static_cast<std::int64_t>(fabric.now() / 1000);
}

struct EndpointSet {
  std::string name;
  std::string api;   // rendezvous + account service
  std::string avs;   // persistent device connection
  std::string sip;   // registrar
  std::string turn;  // relay allocator
};

// Known sets: "na" and "eu". Throws Error(not_found).
const EndpointSet& endpoint_set(std::string_view name);
const std::vector<EndpointSet>& endpoint_sets();
// Static locale table; anything unknown falls back to "na".
std::string_view endpoint_set_for_locale(std::string_view locale);
// Every cloud hostname the device knows about (pairing resolver + proxy allow-list).
std::vector<std::string> hardwired_hostnames();

inline constexpr std::string_view kDomain = "amazon.test";
inline constexpr std::string_view kPstnHostname = "pstn.amazon.test";
inline constexpr std::uint16_t kHttpsPort = 443;
inline constexpr std::uint16_t kGatewayPort = 5061;

}  // namespace echotb::cloud
