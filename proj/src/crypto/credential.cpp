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

#include "echotb/crypto/credential.hpp"

#include "echotb/crypto/primitives.hpp"
#include "echotb/error.hpp"

#include <json.hpp>

namespace echotb::crypto {

void WifiCredential::validate() const {
  if (ssid.empty() || ssid.size() > 32) throw Error(Errc::invalid_argument, "ssid must be 1-32 bytes");
  if (security == Security::psk) {
    if (passphrase.size() < 8 || passphrase.size() > 63)
      throw Error(Errc::invalid_argument, "psk passphrase must be 8-63 characters");
  } else if (!passphrase.empty()) {
    throw Error(Errc::invalid_argument, "open network with a passphrase");
  }
}

std::string WifiCredential::canonical() const {
  nlohmann::json doc = {{"ssid", ssid},
                        {"security", security == Security::psk ? "psk" : "open"},
                        {"passphrase", passphrase}};
  return doc.dump();
}

WifiCredential WifiCredential::from_canonical(std::string_view text) {
  auto doc = nlohmann::json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw Error(Errc::malformed, "credential document");
  try {
    WifiCredential c;
    c.ssid = doc.at("ssid").get<std::string>();
    auto sec = doc.at("security").get<std::string>();
    if (sec == "psk") c.security = Security::psk;
    else if (sec == "open") c.security = Security::open;
    else throw Error(Errc::malformed, "security " + sec);
    c.passphrase = doc.at("passphrase").get<std::string>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::malformed, e.what());
  }
}

std::string EncryptedCredentialBlob::armor() const {
  Bytes raw;
  put_u16(raw, static_cast<std::uint16_t>(wrapped_key.size()));
  append(raw, wrapped_key);
  append(raw, iv);
  append(raw, ciphertext);
  return crypto::armor("CMS", raw);
}

EncryptedCredentialBlob EncryptedCredentialBlob::dearmor(std::string_view text) {
  auto raw = crypto::dearmor("CMS", text);
  std::size_t wrapped_len = get_u16(raw, 0);
  if (raw.size() < 2 + wrapped_len + kAesBlock) throw Error(Errc::truncated, "credential envelope");
  EncryptedCredentialBlob blob;
  auto it = raw.begin() + 2;
  blob.wrapped_key.assign(it, it + wrapped_len);
  it += wrapped_len;
  blob.iv.assign(it, it + kAesBlock);
  it += kAesBlock;
  blob.ciphertext.assign(it, raw.end());
  return blob;
}

EncryptedCredentialBlob encrypt_credential(const WifiCredential& credential, const DeviceCertificate& certificate,
                                           SeededRng& rng) {
  credential.validate();
  if (!verify_certificate(certificate)) throw Error(Errc::bad_certificate, "signature does not verify");
  Bytes key = rng.bytes(kAesKeyLen);
  EncryptedCredentialBlob blob;
  blob.iv = rng.bytes(kAesBlock);
  blob.ciphertext = aes256_cbc_encrypt(key, blob.iv, to_bytes(credential.canonical()));
  blob.wrapped_key = wrap_key(certificate.public_key, key, rng);
  return blob;
}

WifiCredential decrypt_credential(const EncryptedCredentialBlob& blob, const PrivateKey& key) {
  if (blob.iv.size() != kAesBlock) throw Error(Errc::truncated, "IV");
  if (blob.ciphertext.empty() || blob.ciphertext.size() % kAesBlock != 0)
    throw Error(Errc::truncated, "ciphertext length");
  Bytes data_key = unwrap_key(key, blob.wrapped_key);
  if (data_key.size() != kAesKeyLen) throw Error(Errc::unwrap_failed, "data key length");
  Bytes plain = aes256_cbc_decrypt(data_key, blob.iv, blob.ciphertext);
  auto credential = WifiCredential::from_canonical(to_string(plain));
  credential.validate();
  return credential;
}

}  // namespace echotb::crypto
