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
#include "echotb/crypto/keys.hpp"

#include <string>

namespace echotb::crypto {

struct WifiCredential {
  enum class Security { open, psk };

  std::string ssid;
  Security security = Security::psk;
  std::string passphrase;

  // Throws Error(invalid_argument) on out-of-bounds fields.
  void validate() const;
  std::string canonical() const;
  static WifiCredential from_canonical(std::string_view text);
  bool operator==(const WifiCredential&) const = default;
};

/// CMS-shaped envelope: key wrapped to the device certificate, then
/// AES-256-CBC over the canonical credential.
struct EncryptedCredentialBlob {
  Bytes wrapped_key;
  Bytes iv;
  Bytes ciphertext;

  std::string armor() const;
  static EncryptedCredentialBlob dearmor(std::string_view text);
  bool operator==(const EncryptedCredentialBlob&) const = default;
};

EncryptedCredentialBlob encrypt_credential(const WifiCredential& credential,
                                           const DeviceCertificate& certificate, SeededRng& rng);
WifiCredential decrypt_credential(const EncryptedCredentialBlob& blob, const PrivateKey& key);

}  // namespace echotb::crypto
