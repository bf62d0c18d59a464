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

#include "echotb/cloud/services.hpp"

#include "echotb/crypto/primitives.hpp"
#include "echotb/error.hpp"

namespace echotb::cloud {

namespace {
constexpr std::string_view kSipDomain = "sip.amazon.test";

std::int64_t abs_diff(std::int64_t a, std::int64_t b) { return a > b ? a - b : b - a; }

std::optional<std::string> strip_uri(std::string_view uri, std::string_view prefix) {
  std::string suffix = "@" + std::string(kSipDomain);
  if (!uri.starts_with(prefix) || !uri.ends_with(suffix)) return std::nullopt;
  auto mid = uri.substr(prefix.size(), uri.size() - prefix.size() - suffix.size());
  if (mid.empty()) return std::nullopt;
  return std::string(mid);
}
}  // namespace

nlohmann::json Grant::to_json() const {
  return {{"private_key", private_key}, {"auth_token", base64_encode(auth_token)}, {"friendly_name", friendly_name}};
}

Grant Grant::from_json(const nlohmann::json& j) {
  try {
    return Grant{j.at("private_key").get<std::string>(), base64_decode(j.at("auth_token").get<std::string>()),
                 j.at("friendly_name").get<std::string>()};
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::malformed, std::string("grant: ") + e.what());
  }
}

std::string_view to_string(LinkState s) noexcept {
  switch (s) {
    case LinkState::pending: return "pending";
    case LinkState::registered: return "registered";
    case LinkState::expired: return "expired";
  }
  return "expired";
}

std::string friendly_name_for(std::string_view serial) {
  return "Echo-" + std::string(serial.size() > 4 ? serial.substr(serial.size() - 4) : serial);
}

std::string account_uri_for(std::string_view account_id) {
  return "sip:acct-" + std::string(account_id) + "@" + std::string(kSipDomain);
}

std::string device_uri_for(std::string_view serial) {
  return "sip:dev-" + std::string(serial) + "@" + std::string(kSipDomain);
}

AccountService::AccountService(crypto::SeededRng rng) : rng_(std::move(rng)) {
  cloud_keypair_ = crypto::keygen(rng_);
  sip_key_ = rng_.bytes(32);
}

// ---------------------------------------------------------------- setup

void AccountService::add_inventory(InventoryRecord record) {
  if (inventory_.contains(record.serial)) throw Error(Errc::invalid_argument, "duplicate serial " + record.serial);
  auto serial = record.serial;
  inventory_.emplace(serial, std::move(record));
}

const InventoryRecord* AccountService::inventory(const std::string& serial) const {
  auto it = inventory_.find(serial);
  return it == inventory_.end() ? nullptr : &it->second;
}

Account& AccountService::add_account(const std::string& id, std::optional<std::string> phone) {
  if (accounts_.contains(id)) throw Error(Errc::invalid_argument, "duplicate account " + id);
  Account a;
  a.id = id;
  a.signing = crypto::keygen(rng_);
  a.phone = std::move(phone);
  return accounts_.emplace(id, std::move(a)).first->second;
}

void AccountService::grant_dropin(const std::string& caller, const std::string& callee) {
  auto* target = find_account(callee);
  if (!target || !find_account(caller)) throw Error(Errc::not_found, "drop-in between unknown accounts");
  target->dropin_from.insert(caller);
}

void AccountService::preregister(const std::string& serial, const std::string& account) {
  auto* a = find_account(account);
  if (!a || !inventory(serial)) throw Error(Errc::not_found, "preregister " + serial + " to " + account);
  if (auto owner = owner_of(serial); owner && *owner != account) throw Error(Errc::already_registered, serial);
  owners_[serial] = account;
  a->devices.insert(serial);
  a->friendly_names[serial] = friendly_name_for(serial);
}

// ---------------------------------------------------------------- queries

Account* AccountService::find_account(const std::string& id) {
  auto it = accounts_.find(id);
  return it == accounts_.end() ? nullptr : &it->second;
}

const Account* AccountService::find_account(const std::string& id) const {
  auto it = accounts_.find(id);
  return it == accounts_.end() ? nullptr : &it->second;
}

Account* AccountService::account_by_cookie(std::string_view cookie) {
  if (cookie.empty()) return nullptr;
  for (auto& [id, a] : accounts_) {
    if (!a.cookie.empty() && crypto::constant_time_equal(to_bytes(a.cookie), to_bytes(cookie))) return &a;
  }
  return nullptr;
}

std::optional<std::string> AccountService::owner_of(const std::string& serial) const {
  auto it = owners_.find(serial);
  if (it == owners_.end()) return std::nullopt;
  return it->second;
}

bool AccountService::dropin_allowed(const std::string& caller_account, const std::string& callee_account) const {
  const auto* callee = find_account(callee_account);
  return callee && callee->dropin_from.contains(caller_account);
}

std::size_t AccountService::live_codes() const {
  std::size_t n = 0;
  for (const auto& [code, rec] : codes_) n += rec.state != LinkState::expired;
  return n;
}

std::optional<crypto::PublicKey> AccountService::device_key(const std::string& serial) const {
  auto it = device_keys_.find(serial);
  if (it == device_keys_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> AccountService::serial_of_device_uri(std::string_view uri) const {
  auto s = strip_uri(uri, "sip:dev-");
  if (!s || !inventory(*s)) return std::nullopt;
  return s;
}

std::optional<std::string> AccountService::account_of_account_uri(std::string_view uri) const {
  auto a = strip_uri(uri, "sip:acct-");
  if (!a || !find_account(*a)) return std::nullopt;
  return a;
}

// ---------------------------------------------------------------- rendezvous

std::string AccountService::login(const std::string& account_id) {
  auto* a = find_account(account_id);
  if (!a) throw Error(Errc::unauthorized, "unknown account " + account_id);
  if (a->cookie.empty()) a->cookie = "session-" + hex_encode(rng_.bytes(16));
  return a->cookie;
}

std::string AccountService::fresh_code() {
  for (;;) {
    std::string code;
    for (std::size_t i = 0; i < kLinkCodeLen; ++i) code += kLinkCodeAlphabet[rng_.uniform(kLinkCodeAlphabet.size())];
    auto it = codes_.find(code);
    if (it == codes_.end() || it->second.state == LinkState::expired) return code;
    ++regenerations_;
  }
}

void AccountService::expire_codes(const std::string& serial) {
  for (auto& [code, rec] : codes_) {
    if (rec.serial == serial) rec.state = LinkState::expired;
  }
}

std::string AccountService::create_link_code(const std::string& device_type, const std::string& serial,
                                             ByteView secret, std::int64_t now) {
  const auto* inv = inventory(serial);
  if (!inv || inv->device_type != device_type || !crypto::constant_time_equal(inv->secret, secret)) {
    throw Error(Errc::unauthorized, "inventory does not match " + serial);
  }
  expire_codes(serial);
  std::string code = fresh_code();
  codes_[code] = LinkCodeRecord{code, serial, LinkState::pending, std::nullopt, std::nullopt, now};
  return code;
}

CheckResult AccountService::check_link_code(const std::string& serial, ByteView secret, const std::string& code,
                                            std::int64_t now) {
  const auto* inv = inventory(serial);
  if (!inv || !crypto::constant_time_equal(inv->secret, secret)) {
    throw Error(Errc::unauthorized, "secret does not match " + serial);
  }
  auto it = codes_.find(code);
  if (it == codes_.end() || it->second.serial != serial) throw Error(Errc::unauthorized, "unknown link code");
  auto& rec = it->second;
  if (rec.state == LinkState::pending && now - rec.created_at > kLinkCodeTtlSeconds) rec.state = LinkState::expired;
  if (rec.state != LinkState::registered) return {rec.state, std::nullopt};
  // Grant is minted once and then replayed verbatim.
  if (!rec.grant) rec.grant = mint_grant(serial, *rec.account, now);
  return {LinkState::registered, rec.grant};
}

std::string AccountService::register_device(std::string_view cookie, const std::string& device_type,
                                            const std::string& serial, const std::string& code, std::int64_t now) {
  Account* account = account_by_cookie(cookie);
  if (!account) throw Error(Errc::bad_cookie, "cookie not recognised");
  auto it = codes_.find(code);
  if (it == codes_.end() || it->second.serial != serial) throw Error(Errc::dead_code, "link code not live");
  auto& rec = it->second;
  if (rec.state == LinkState::pending && now - rec.created_at > kLinkCodeTtlSeconds) rec.state = LinkState::expired;
  if (rec.state != LinkState::pending) throw Error(Errc::dead_code, "link code " + std::string(to_string(rec.state)));
  const auto* inv = inventory(serial);
  if (!inv || inv->device_type != device_type) throw Error(Errc::dead_code, "device type mismatch");
  if (auto owner = owner_of(serial); owner && *owner != account->id) {
    throw Error(Errc::already_registered, serial + " belongs to another account");
  }
  owners_[serial] = account->id;
  account->devices.insert(serial);
  account->friendly_names[serial] = friendly_name_for(serial);
  rec.state = LinkState::registered;
  rec.account = account->id;
  return account->id;
}

void AccountService::deregister(const std::string& serial) {
  if (auto owner = owner_of(serial)) {
    if (auto* a = find_account(*owner)) {
      a->devices.erase(serial);
      a->friendly_names.erase(serial);
    }
  }
  owners_.erase(serial);
  device_keys_.erase(serial);
  factory_grants_.erase(serial);
  expire_codes(serial);
}

Grant AccountService::mint_grant(const std::string& serial, const std::string& account, std::int64_t now) {
  auto device_keys = crypto::keygen(rng_);
  device_keys_[serial] = device_keys.public_key;
  const auto* a = find_account(account);
  std::string name = a && a->friendly_names.contains(serial) ? a->friendly_names.at(serial) : friendly_name_for(serial);
  return Grant{crypto::private_key_encode(device_keys.private_key),
               crypto::mint_auth_token(cloud_keypair_, account, serial, now, rng_), name};
}

Grant AccountService::issue_grant(const std::string& serial, std::int64_t now) {
  auto owner = owner_of(serial);
  if (!owner) throw Error(Errc::unauthorized, serial + " is not registered");
  auto it = factory_grants_.find(serial);
  if (it != factory_grants_.end()) return it->second;
  return factory_grants_[serial] = mint_grant(serial, *owner, now);
}

// ---------------------------------------------------------------- AVS + comms

AvsIdentity AccountService::avs_accept(const nlohmann::json& negotiation, std::int64_t now) const {
  Bytes signed_bytes;
  Bytes signature;
  nlohmann::json claims;
  try {
    signed_bytes = base64_decode(negotiation.at("signed").get<std::string>());
    signature = base64_decode(negotiation.at("signature").get<std::string>());
    claims = nlohmann::json::parse(to_string(signed_bytes));
  } catch (const std::exception&) {
    throw Error(Errc::unauthorized, "malformed negotiation");
  }
  std::string serial;
  Bytes token;
  std::int64_t timestamp = 0;
  try {
    serial = claims.at("serial").get<std::string>();
    token = base64_decode(claims.at("auth_token").get<std::string>());
    timestamp = claims.at("timestamp").get<std::int64_t>();
    (void)claims.at("device_type").get<std::string>();
  } catch (const std::exception&) {
    throw Error(Errc::unauthorized, "malformed negotiation claims");
  }
  auto key = device_key(serial);
  if (!key || !crypto::verify_detached(*key, signed_bytes, signature)) {
    throw Error(Errc::unauthorized, "bad signature");
  }
  crypto::AuthTokenClaims opened;
  try {
    opened = crypto::open_auth_token(cloud_keypair_, token);
  } catch (const Error&) {
    throw Error(Errc::unauthorized, "bad auth token");
  }
  if (opened.serial != serial) throw Error(Errc::unauthorized, "token/serial mismatch");
  if (owner_of(serial) != opened.account) throw Error(Errc::unauthorized, "device not registered to token account");
  if (abs_diff(now, timestamp) > kAvsClockSkewSeconds) throw Error(Errc::unauthorized, "stale timestamp");
  return {opened.account, serial};
}

std::string AccountService::sip_credential(std::string_view account_uri, std::string_view device_uri) const {
  return hex_encode(crypto::hmac_sha256(sip_key_, to_bytes(std::string(account_uri) + "|" + std::string(device_uri))));
}

calling::CommsConfig AccountService::configure_comms(const std::string& serial) const {
  auto owner = owner_of(serial);
  if (!owner) throw Error(Errc::unauthorized, serial + " is not registered");
  calling::CommsConfig c;
  c.sip_username = "dev-" + serial;
  c.registrar_domain = std::string(kSipDomain);
  c.account_uri = account_uri_for(*owner);
  c.device_uri = device_uri_for(serial);
  c.credential = sip_credential(c.account_uri, c.device_uri);
  return c;
}

bool AccountService::check_sip_credential(std::string_view account_uri, std::string_view device_uri,
                                          std::string_view credential) const {
  return crypto::constant_time_equal(to_bytes(sip_credential(account_uri, device_uri)), to_bytes(credential));
}

crypto::CallAuthToken AccountService::mint_call_token(const std::string& caller_account, std::string caller_uri,
                                                      std::string callee_uri, crypto::CallType type,
                                                      std::int64_t now) {
  const auto* a = find_account(caller_account);
  if (!a) throw Error(Errc::not_found, "no account " + caller_account);
  return crypto::mint_call_token(a->signing, std::move(caller_uri), std::move(callee_uri), type,
                                 kCallTokenTtlSeconds, now, rng_);
}

}  // namespace echotb::cloud
