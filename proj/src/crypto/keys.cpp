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

#include "echotb/crypto/keys.hpp"

#include "echotb/crypto/primitives.hpp"
#include "echotb/error.hpp"

#include <json.hpp>
#include <memory>
#include <openssl/evp.h>

namespace echotb::crypto {

namespace {

using Pkey = std::unique_ptr<EVP_PKEY, decltype(&EVP_PKEY_free)>;
using MdCtx = std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)>;
using PkeyCtx = std::unique_ptr<EVP_PKEY_CTX, decltype(&EVP_PKEY_CTX_free)>;

constexpr std::size_t kRawKeyLen = 32;
constexpr std::size_t kWrapTagLen = 16;

Pkey private_pkey(int type, ByteView raw) {
  if (raw.size() != kRawKeyLen) throw Error(Errc::wrong_length, "raw private key");
  Pkey k(EVP_PKEY_new_raw_private_key(type, nullptr, raw.data(), raw.size()), EVP_PKEY_free);
  if (!k) throw Error(Errc::malformed, "private key");
  return k;
}

Pkey public_pkey(int type, ByteView raw) {
  if (raw.size() != kRawKeyLen) throw Error(Errc::wrong_length, "raw public key");
  Pkey k(EVP_PKEY_new_raw_public_key(type, nullptr, raw.data(), raw.size()), EVP_PKEY_free);
  if (!k) throw Error(Errc::malformed, "public key");
  return k;
}

Bytes raw_public(const Pkey& k) {
  Bytes out(kRawKeyLen);
  std::size_t len = out.size();
  if (EVP_PKEY_get_raw_public_key(k.get(), out.data(), &len) != 1 || len != kRawKeyLen)
    throw Error(Errc::invalid_state, "raw public key export");
  return out;
}

Bytes x25519(ByteView priv, ByteView peer_pub) {
  auto mine = private_pkey(EVP_PKEY_X25519, priv);
  auto peer = public_pkey(EVP_PKEY_X25519, peer_pub);
  PkeyCtx ctx(EVP_PKEY_CTX_new(mine.get(), nullptr), EVP_PKEY_CTX_free);
  Bytes shared(kRawKeyLen);
  std::size_t len = shared.size();
  if (!ctx || EVP_PKEY_derive_init(ctx.get()) != 1 || EVP_PKEY_derive_set_peer(ctx.get(), peer.get()) != 1 ||
      EVP_PKEY_derive(ctx.get(), shared.data(), &len) != 1)
    throw Error(Errc::unwrap_failed, "key agreement");
  return shared;
}

struct WrapKeys {
  Bytes enc;
  Bytes mac;
};

WrapKeys wrap_keys(ByteView shared, ByteView eph_pub, ByteView recipient_pub) {
  Bytes info = to_bytes("echotb-key-wrap");
  append(info, eph_pub);
  append(info, recipient_pub);
  Bytes prk = hmac_sha256(shared, info);
  return {hmac_sha256(prk, to_bytes("enc")), hmac_sha256(prk, to_bytes("mac"))};
}

Bytes cert_tbs(const std::string& serial, const PublicKey& pub) {
  Bytes tbs = to_bytes("echotb-pairing-cert");
  tbs.push_back(0);
  append(tbs, to_bytes(serial));
  tbs.push_back(0);
  append(tbs, pub.sign);
  append(tbs, pub.agree);
  return tbs;
}

}  // namespace

std::string key_id_of(const PublicKey& pub) {
  Bytes both = pub.sign;
  append(both, pub.agree);
  auto digest = sha256(both);
  return hex_encode(ByteView(digest).first(8));
}

AsymKeypair keypair_from_private(const PrivateKey& priv) {
  AsymKeypair kp;
  kp.private_key = priv;
  kp.public_key.sign = raw_public(private_pkey(EVP_PKEY_ED25519, priv.sign));
  kp.public_key.agree = raw_public(private_pkey(EVP_PKEY_X25519, priv.agree));
  kp.key_id = key_id_of(kp.public_key);
  return kp;
}

AsymKeypair keygen(SeededRng& rng) {
  PrivateKey priv;
  priv.sign = rng.bytes(kRawKeyLen);
  priv.agree = rng.bytes(kRawKeyLen);
  return keypair_from_private(priv);
}

Bytes sign_detached(const PrivateKey& priv, ByteView message) {
  auto key = private_pkey(EVP_PKEY_ED25519, priv.sign);
  MdCtx ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  Bytes sig(kSignatureLen);
  std::size_t len = sig.size();
  if (!ctx || EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1 ||
      EVP_DigestSign(ctx.get(), sig.data(), &len, message.data(), message.size()) != 1)
    throw Error(Errc::invalid_state, "Ed25519 sign");
  return sig;
}

bool verify_detached(const PublicKey& pub, ByteView message, ByteView signature) noexcept {
  if (pub.sign.size() != kRawKeyLen || signature.size() != kSignatureLen) return false;
  EVP_PKEY* raw = EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, pub.sign.data(), pub.sign.size());
  if (!raw) return false;
  Pkey key(raw, EVP_PKEY_free);
  MdCtx ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1) return false;
  return EVP_DigestVerify(ctx.get(), signature.data(), signature.size(), message.data(), message.size()) == 1;
}

Bytes wrap_key(const PublicKey& recipient, ByteView key, SeededRng& rng) {
  Bytes eph_priv = rng.bytes(kRawKeyLen);
  Bytes eph_pub = raw_public(private_pkey(EVP_PKEY_X25519, eph_priv));
  auto keys = wrap_keys(x25519(eph_priv, recipient.agree), eph_pub, recipient.agree);
  Bytes out = eph_pub;
  Bytes ct = aes256_ctr(keys.enc, Bytes(kAesBlock, 0), key);
  append(out, ct);
  auto tag = hmac_sha256(keys.mac, out);
  append(out, ByteView(tag).first(kWrapTagLen));
  return out;
}

Bytes unwrap_key(const PrivateKey& recipient, ByteView wrapped) {
  if (wrapped.size() <= kRawKeyLen + kWrapTagLen) throw Error(Errc::unwrap_failed, "wrapped key too short");
  try {
    Bytes my_pub = raw_public(private_pkey(EVP_PKEY_X25519, recipient.agree));
    auto eph_pub = wrapped.first(kRawKeyLen);
    auto body = wrapped.first(wrapped.size() - kWrapTagLen);
    auto tag = wrapped.last(kWrapTagLen);
    auto keys = wrap_keys(x25519(recipient.agree, eph_pub), eph_pub, my_pub);
    auto expect = hmac_sha256(keys.mac, body);
    if (!constant_time_equal(ByteView(expect).first(kWrapTagLen), tag)) throw Error(Errc::unwrap_failed);
    return aes256_ctr(keys.enc, Bytes(kAesBlock, 0), body.subspan(kRawKeyLen));
  } catch (const Error& e) {
    if (e.code() == Errc::unwrap_failed) throw;
    throw Error(Errc::unwrap_failed, e.what());
  }
}

DeviceCertificate self_sign(const AsymKeypair& keypair, const std::string& serial) {
  DeviceCertificate cert;
  cert.subject = serial;
  cert.public_key = keypair.public_key;
  cert.signature = sign_detached(keypair.private_key, cert_tbs(serial, keypair.public_key));
  return cert;
}

bool verify_certificate(const DeviceCertificate& cert) noexcept {
  try {
    return verify_detached(cert.public_key, cert_tbs(cert.subject, cert.public_key), cert.signature);
  } catch (...) {
    return false;
  }
}

std::string armor(std::string_view label, ByteView data) {
  std::string b64 = base64_encode(data);
  std::string out = "-----BEGIN " + std::string(label) + "-----\n";
  for (std::size_t i = 0; i < b64.size(); i += 64) out += b64.substr(i, 64) + "\n";
  out += "-----END " + std::string(label) + "-----\n";
  return out;
}

Bytes dearmor(std::string_view label, std::string_view text) {
  const std::string begin = "-----BEGIN " + std::string(label) + "-----\n";
  const std::string end = "-----END " + std::string(label) + "-----\n";
  if (!text.starts_with(begin) || !text.ends_with(end)) throw Error(Errc::malformed, "armor markers");
  auto body = text.substr(begin.size(), text.size() - begin.size() - end.size());
  std::string b64;
  for (char c : body)
    if (c != '\n') b64 += c;
  if (b64.empty()) throw Error(Errc::truncated, "empty armor body");
  return base64_decode(b64);
}

std::string certificate_armor(const DeviceCertificate& cert) {
  nlohmann::json doc = {{"subject", cert.subject},
                        {"sign", base64_encode(cert.public_key.sign)},
                        {"agree", base64_encode(cert.public_key.agree)},
                        {"signature", base64_encode(cert.signature)}};
  return armor("CERTIFICATE", to_bytes(doc.dump()));
}

DeviceCertificate certificate_dearmor(std::string_view text) {
  auto raw = dearmor("CERTIFICATE", text);
  auto doc = nlohmann::json::parse(raw.begin(), raw.end(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw Error(Errc::bad_certificate, "not a certificate document");
  try {
    DeviceCertificate cert;
    cert.subject = doc.at("subject").get<std::string>();
    cert.public_key.sign = base64_decode(doc.at("sign").get<std::string>());
    cert.public_key.agree = base64_decode(doc.at("agree").get<std::string>());
    cert.signature = base64_decode(doc.at("signature").get<std::string>());
    return cert;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::bad_certificate, e.what());
  }
}

std::string private_key_encode(const PrivateKey& key) {
  Bytes both = key.sign;
  append(both, key.agree);
  return base64_encode(both);
}

PrivateKey private_key_decode(std::string_view text) {
  auto raw = base64_decode(text);
  if (raw.size() != 2 * kRawKeyLen) throw Error(Errc::wrong_length, "private key");
  return {Bytes(raw.begin(), raw.begin() + kRawKeyLen), Bytes(raw.begin() + kRawKeyLen, raw.end())};
}

std::string public_key_encode(const PublicKey& key) {
  Bytes both = key.sign;
  append(both, key.agree);
  return base64_encode(both);
}

PublicKey public_key_decode(std::string_view text) {
  auto raw = base64_decode(text);
  if (raw.size() != 2 * kRawKeyLen) throw Error(Errc::wrong_length, "public key");
  return {Bytes(raw.begin(), raw.begin() + kRawKeyLen), Bytes(raw.begin() + kRawKeyLen, raw.end())};
}

}  // namespace echotb::crypto
