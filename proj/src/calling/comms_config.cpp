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

#include "echotb/calling/comms_config.hpp"

#include "echotb/error.hpp"

namespace echotb::calling {

nlohmann::json CommsConfig::to_json() const {
  return {{"sip_username", sip_username},
          {"registrar_domain", registrar_domain},
          {"credential", credential},
          {"account_uri", account_uri},
          {"device_uri", device_uri}};
}

CommsConfig CommsConfig::from_json(const nlohmann::json& j) {
  try {
    CommsConfig c;
    c.sip_username = j.at("sip_username").get<std::string>();
    c.registrar_domain = j.at("registrar_domain").get<std::string>();
    c.credential = j.at("credential").get<std::string>();
    c.account_uri = j.at("account_uri").get<std::string>();
    c.device_uri = j.at("device_uri").get<std::string>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::malformed, std::string("comms config: ") + e.what());
  }
}

}  // namespace echotb::calling
