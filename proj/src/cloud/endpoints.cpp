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

#include "echotb/cloud/endpoints.hpp"

#include "echotb/error.hpp"

namespace echotb::cloud {

const std::vector<EndpointSet>& endpoint_sets() {
  static const std::vector<EndpointSet> sets = {
      {"na", "api.amazon.test", "avs.amazon.test", "sip.amazon.test", "turn.amazon.test"},
      {"eu", "api-eu.amazon.test", "avs-eu.amazon.test", "sip-eu.amazon.test", "turn-eu.amazon.test"},
  };
  return sets;
}

const EndpointSet& endpoint_set(std::string_view name) {
  for (const auto& s : endpoint_sets()) {
    if (s.name == name) return s;
  }
  throw Error(Errc::not_found, "no endpoint set '" + std::string(name) + "'");
}

std::string_view endpoint_set_for_locale(std::string_view locale) {
  static constexpr std::string_view kEu[] = {"de", "fr", "it", "es", "en-GB", "en_GB"};
  for (auto l : kEu) {
    if (locale == l || (l.size() == 2 && locale.size() > 2 && locale.substr(0, 2) == l &&
                        (locale[2] == '-' || locale[2] == '_'))) {
      return "eu";
    }
  }
  return "na";
}

std::vector<std::string> hardwired_hostnames() {
  std::vector<std::string> out;
  for (const auto& s : endpoint_sets()) {
    out.push_back(s.api);
    out.push_back(s.avs);
    out.push_back(s.sip);
    out.push_back(s.turn);
  }
  return out;
}

}  // namespace echotb::cloud
