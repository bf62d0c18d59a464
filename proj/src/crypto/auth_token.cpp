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

#include "echotb/crypto/auth_token.hpp"

#include "echotb/crypto/primitives.hpp"
#include "echotb/error.hpp"

#include <json.hpp>

namespace echotb::crypto {

namespace {
constexpr std::string_view kMagic = "AT1";
constexpr std::size_t kTagLen = 32;

struct TokenKeys {
  Bytes enc;
  Bytes mac;
};

TokenKeys token_keys(ByteView data_key) {
  return {hmac_sha256(data_key, to_bytes("auth-token-enc")), hmac_sha256(data_key, to_bytes("auth-token-mac"))};
}
}  // namespace

AuthToken mint_auth_token(const AsymKeypair& cloud, const std::string& account, const std::string& serial,
                          std::int64_t now, SeededRng& rng) {
  Bytes data_key = rng.bytes(kAesKeyLen);
  Bytes iv = rng.bytes(kAesBlock);
  auto keys = token_keys(data_key);
  nlohmann::json claims = {{"account", account}, {"serial", serial}, {"issued", now}};
  Bytes wrapped = wrap_key(cloud.public_key, data_key, rng);

  AuthToken token = to_bytes(kMagic);
  append(token, iv);
  put_u16(token, static_cast<std::uint16_t>(wrapped.size()));
  append(token, wrapped);
  append(token, aes256_cbc_encrypt(keys.enc, iv, to_bytes(claims.dump())));
  append(token, hmac_sha256(keys.mac, token));
  return token;
}

AuthTokenClaims open_auth_token(const AsymKeypair& cloud, ByteView token) {
  const std::size_t head = kMagic.size() + kAesBlock + 2;
  if (token.size() < head + kTagLen || to_string(token.first(kMagic.size())) != kMagic)
    throw Error(Errc::auth_failed, "token framing");
  std::size_t wrapped_len = get_u16(token, kMagic.size() + kAesBlock);
  if (token.size() < head + wrapped_len + kAesBlock + kTagLen) throw Error(Errc::auth_failed, "token framing");

  Bytes data_key;
  try {
    data_key = unwrap_key(cloud.private_key, token.subspan(head, wrapped_len));
  } catch (const Error&) {
    throw Error(Errc::auth_failed, "token key unwrap");
  }
  auto keys = token_keys(data_key);
  auto body = token.first(token.size() - kTagLen);
  if (!constant_time_equal(hmac_sha256(keys.mac, body), token.last(kTagLen)))
    throw Error(Errc::auth_failed, "token tag");

  auto iv = token.subspan(kMagic.size(), kAesBlock);
  auto ct = body.subspan(head + wrapped_len);
  Bytes plain;
  try {
    plain = aes256_cbc_decrypt(keys.enc, iv, ct);
  } catch (const Error&) {
    throw Error(Errc::auth_failed, "token body");
  }
  auto doc = nlohmann::json::parse(plain.begin(), plain.end(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw Error(Errc::auth_failed, "token claims");
  try {
    return {doc.at("account").get<std::string>(), doc.at("serial").get<std::string>(),
            doc.at("issued").get<std::int64_t>()};
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::auth_failed, e.what());
  }
}

}  // namespace echotb::crypto
