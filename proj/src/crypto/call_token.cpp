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

#include "echotb/crypto/call_token.hpp"

#include "echotb/error.hpp"

#include <json.hpp>

namespace echotb::crypto {

std::string_view to_string(CallType t) noexcept { return t == CallType::intercom ? "intercom" : "regular"; }

CallType call_type_from(std::string_view s) {
  if (s == "intercom") return CallType::intercom;
  if (s == "regular") return CallType::regular;
  throw Error(Errc::malformed, "call type '" + std::string(s) + "'");
}

Bytes CallAuthToken::signed_bytes() const {
  // Length-prefixed fields so no two distinct tokens share an encoding.
  Bytes out = to_bytes("echotb-call-token-v1");
  auto field = [&out](ByteView v) {
    put_u32(out, static_cast<std::uint32_t>(v.size()));
    append(out, v);
  };
  field(to_bytes(caller));
  field(to_bytes(callee));
  field(to_bytes(crypto::to_string(type)));
  put_u64(out, static_cast<std::uint64_t>(issued_at));
  put_u64(out, static_cast<std::uint64_t>(ttl));
  field(nonce);
  return out;
}

std::string CallAuthToken::encode() const {
  nlohmann::json doc = {{"caller", caller},
                        {"callee", callee},
                        {"type", crypto::to_string(type)},
                        {"iat", issued_at},
                        {"ttl", ttl},
                        {"nonce", base64_encode(nonce)},
                        {"sig", base64_encode(signature)}};
  return base64_encode(to_bytes(doc.dump()));
}

CallAuthToken CallAuthToken::decode(std::string_view text) {
  auto raw = base64_decode(text);
  auto doc = nlohmann::json::parse(raw.begin(), raw.end(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw Error(Errc::malformed, "call token");
  try {
    CallAuthToken t;
    t.caller = doc.at("caller").get<std::string>();
    t.callee = doc.at("callee").get<std::string>();
    t.type = call_type_from(doc.at("type").get<std::string>());
    t.issued_at = doc.at("iat").get<std::int64_t>();
    t.ttl = doc.at("ttl").get<std::int64_t>();
    t.nonce = base64_decode(doc.at("nonce").get<std::string>());
    t.signature = base64_decode(doc.at("sig").get<std::string>());
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::malformed, e.what());
  }
}

CallAuthToken mint_call_token(const AsymKeypair& account_key, std::string caller, std::string callee, CallType type,
                              std::int64_t ttl, std::int64_t now, SeededRng& rng) {
  if (ttl <= 0) throw Error(Errc::invalid_argument, "ttl must be positive");
  CallAuthToken t;
  t.caller = std::move(caller);
  t.callee = std::move(callee);
  t.type = type;
  t.issued_at = now;
  t.ttl = ttl;
  t.nonce = rng.bytes(16);
  t.signature = sign_detached(account_key.private_key, t.signed_bytes());
  return t;
}

bool verify_call_token(const PublicKey& account_public, const CallAuthToken& token, std::string_view caller,
                       std::string_view callee, std::int64_t now, NonceCache& cache) {
  if (!verify_detached(account_public, token.signed_bytes(), token.signature)) return false;
  if (cache.seen(token.nonce)) return false;
  cache.record(token.nonce);
  if (token.caller != caller || token.callee != callee) return false;
  return now < token.issued_at + token.ttl;
}

}  // namespace echotb::crypto
