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

#include "echotb/device/identity.hpp"

#include "echotb/error.hpp"

#include <algorithm>
#include <cctype>

namespace echotb::device {

std::string derive_pairing_ssid(std::string_view serial) {
  std::string digits;
  for (char c : serial) {
    if (std::isdigit(static_cast<unsigned char>(c))) digits.push_back(c);
  }
  if (digits.size() < 3) throw Error(Errc::invalid_argument, "serial needs at least 3 digits");
  return "Amazon-" + digits.substr(digits.size() - 3);
}

DeviceIdentity manufacture(std::string device_type, std::string serial, crypto::SeededRng& rng, std::string locale) {
  (void)derive_pairing_ssid(serial);  // validates the serial
  DeviceIdentity id;
  id.device_type = std::move(device_type);
  id.serial = std::move(serial);
  id.secret = rng.bytes(kDeviceSecretLen);
  id.pairing = crypto::keygen(rng);
  id.certificate = crypto::self_sign(id.pairing, id.serial);
  id.locale = std::move(locale);
  Bytes mac = rng.bytes(6);
  mac[0] = 0x74;  // fixed vendor prefix
  mac[1] = 0xc2;
  mac[2] = 0x46;
  for (std::size_t i = 0; i < mac.size(); ++i) {
    if (i) id.wifi_mac.push_back(':');
    id.wifi_mac += hex_encode(ByteView(&mac[i], 1));
  }
  return id;
}

}  // namespace echotb::device
