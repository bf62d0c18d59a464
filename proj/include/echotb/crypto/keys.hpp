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
#include "echotb/crypto/rng.hpp"

#include <string>

namespace echotb::crypto {

inline constexpr std::size_t kSignatureLen = 64;

struct PublicKey {
  Bytes sign;   // Ed25519 public key
  Bytes agree;  // X25519 public key, used for key wrapping
  bool operator==(const PublicKey&) const = default;
};

struct PrivateKey {
  Bytes sign;   // Ed25519 seed
  Bytes agree;  // X25519 scalar
  bool operator==(const PrivateKey&) const = default;
};

/// Signing plus key-agreement pair. The key id is a short fingerprint of the
/// public half.
struct AsymKeypair {
  PublicKey public_key;
  PrivateKey private_key;
  std::string key_id;
  bool operator==(const AsymKeypair&) const = default;
};

AsymKeypair keygen(SeededRng& rng);
// Rebuilds the public half and key id from a private key (grant delivery).
AsymKeypair keypair_from_private(const PrivateKey& priv);
std::string key_id_of(const PublicKey& pub);

Bytes sign_detached(const PrivateKey& priv, ByteView message);
// Never throws; malformed keys or signatures verify false.
bool verify_detached(const PublicKey& pub, ByteView message, ByteView signature) noexcept;

// ECIES-style wrap of a symmetric key to a recipient's public key:
// ephemeral X25519 public (32) || AES-256-CTR(key) || HMAC tag (16).
Bytes wrap_key(const PublicKey& recipient, ByteView key, SeededRng& rng);
// Throws Error(unwrap_failed) when the tag does not verify.
Bytes unwrap_key(const PrivateKey& recipient, ByteView wrapped);

/// Self-signed pairing certificate (stand-in for the device's X.509 cert).
struct DeviceCertificate {
  std::string subject;  // device serial
  PublicKey public_key;
  Bytes signature;
  bool operator==(const DeviceCertificate&) const = default;
};

DeviceCertificate self_sign(const AsymKeypair& keypair, const std::string& serial);
bool verify_certificate(const DeviceCertificate& cert) noexcept;

// PEM-shaped text form carried in getDeviceDetails.
std::string certificate_armor(const DeviceCertificate& cert);
DeviceCertificate certificate_dearmor(std::string_view text);

// Serialization of keys for transport inside JSON documents.
std::string private_key_encode(const PrivateKey& key);
PrivateKey private_key_decode(std::string_view text);
std::string public_key_encode(const PublicKey& key);
PublicKey public_key_decode(std::string_view text);

// Shared PEM-style helpers.
std::string armor(std::string_view label, ByteView data);
Bytes dearmor(std::string_view label, std::string_view text);

}  // namespace echotb::crypto
