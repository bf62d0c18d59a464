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
#include "echotb/cloud/services.hpp"
#include "echotb/crypto/keys.hpp"

#include <string>
#include <string_view>

namespace echotb::device {

inline constexpr std::size_t kDeviceSecretLen = 32;

struct DeviceIdentity {
  std::string device_type;
  std::string serial;
  Bytes secret;
  crypto::AsymKeypair pairing;
  crypto::DeviceCertificate certificate;
  std::string software_version = "6.5.3";
  std::string locale = "en-US";
  std::string wifi_mac;

  cloud::InventoryRecord inventory() const { return {device_type, serial, secret}; }
};

// Throws Error(invalid_argument) if the serial has fewer than 3 digits.
DeviceIdentity manufacture(std::string device_type, std::string serial, crypto::SeededRng& rng,
                           std::string locale = "en-US");

// "Amazon-" plus the last three digit characters of the serial.
std::string derive_pairing_ssid(std::string_view serial);

}  // namespace echotb::device
