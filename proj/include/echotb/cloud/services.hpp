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

#include "echotb/calling/comms_config.hpp"
#include "echotb/crypto/auth_token.hpp"
#include "echotb/crypto/call_token.hpp"
#include "echotb/crypto/keys.hpp"
#include "echotb/crypto/rng.hpp"

#include <json.hpp>
#include <map>
#include <optional>
#include <set>
#include <string>

namespace echotb::cloud {

inline constexpr std::size_t kLinkCodeLen = 5;
inline constexpr std::string_view kLinkCodeAlphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
inline constexpr std::int64_t kLinkCodeTtlSeconds = 600;
inline constexpr std::int64_t kAvsClockSkewSeconds = 300;
inline constexpr std::int64_t kCallTokenTtlSeconds = 60;

struct InventoryRecord {
  std::string device_type;
  std::string serial;
  Bytes secret;  // 32 bytes
};

// What a registered device receives from checkLinkCode.
struct Grant {
  std::string private_key;  // crypto::private_key_encode form
  crypto::AuthToken auth_token;
  std::string friendly_name;

  nlohmann::json to_json() const;
  static Grant from_json(const nlohmann::json& j);
  bool operator==(const Grant&) const = default;
};

enum class LinkState { pending, registered, expired };
using echotb::to_string;
std::string_view to_string(LinkState s) noexcept;

struct LinkCodeRecord {
  std::string code;
  std::string serial;
  LinkState state = LinkState::pending;
  std::optional<std::string> account;
  std::optional<Grant> grant;
  std::int64_t created_at = 0;
};

struct Account {
  std::string id;
  std::string cookie;
  crypto::AsymKeypair signing;
  std::set<std::string> devices;
  std::map<std::string, std::string> friendly_names;
  std::optional<std::string> phone;
  std::set<std::string> dropin_from;  // accounts allowed to drop in on this one
};

struct CheckResult {
  LinkState state = LinkState::pending;
  std::optional<Grant> grant;
};

struct AvsIdentity {
  std::string account;
  std::string serial;
};

std::string friendly_name_for(std::string_view serial);
std::string account_uri_for(std::string_view account_id);
std::string device_uri_for(std::string_view serial);

/// Inventory, rendezvous (link codes), accounts and grants. Pure state
/// machine; the HTTP/AVS front ends live in Cloud.
class AccountService {
 public:
  explicit AccountService(crypto::SeededRng rng);

  const crypto::AsymKeypair& cloud_keypair() const noexcept { return cloud_keypair_; }
  crypto::SeededRng& rng() noexcept { return rng_; }

  // ---- setup
  void add_inventory(InventoryRecord record);
  const InventoryRecord* inventory(const std::string& serial) const;
  Account& add_account(const std::string& id, std::optional<std::string> phone = std::nullopt);
  void grant_dropin(const std::string& caller, const std::string& callee);
  // Factory path: the device ships already bound to a buyer's account.
  void preregister(const std::string& serial, const std::string& account);

  // ---- queries
  Account* find_account(const std::string& id);
  const Account* find_account(const std::string& id) const;
  Account* account_by_cookie(std::string_view cookie);
  std::optional<std::string> owner_of(const std::string& serial) const;
  bool dropin_allowed(const std::string& caller_account, const std::string& callee_account) const;
  const std::map<std::string, LinkCodeRecord>& link_codes() const noexcept { return codes_; }
  std::size_t regenerations() const noexcept { return regenerations_; }
  std::size_t live_codes() const;
  std::optional<crypto::PublicKey> device_key(const std::string& serial) const;
  std::optional<std::string> serial_of_device_uri(std::string_view uri) const;
  std::optional<std::string> account_of_account_uri(std::string_view uri) const;

  // ---- operations
  std::string login(const std::string& account_id);
  // Throws Error(unauthorized).
  std::string create_link_code(const std::string& device_type, const std::string& serial, ByteView secret,
                               std::int64_t now);
  // Throws Error(unauthorized) on a wrong secret or unknown code.
  CheckResult check_link_code(const std::string& serial, ByteView secret, const std::string& code, std::int64_t now);
  // Throws bad_cookie, dead_code, already_registered.
  std::string register_device(std::string_view cookie, const std::string& device_type, const std::string& serial,
                              const std::string& code, std::int64_t now);
  void deregister(const std::string& serial);
  // Grant for a device already bound to `account` (factory path). Idempotent.
  Grant issue_grant(const std::string& serial, std::int64_t now);

  // Throws Error(unauthorized, reason).
  AvsIdentity avs_accept(const nlohmann::json& negotiation, std::int64_t now) const;
  calling::CommsConfig configure_comms(const std::string& serial) const;
  bool check_sip_credential(std::string_view account_uri, std::string_view device_uri,
                            std::string_view credential) const;

  crypto::CallAuthToken mint_call_token(const std::string& caller_account, std::string caller_uri,
                                        std::string callee_uri, crypto::CallType type, std::int64_t now);

 private:
  std::string fresh_code();
  std::string sip_credential(std::string_view account_uri, std::string_view device_uri) const;
  Grant mint_grant(const std::string& serial, const std::string& account, std::int64_t now);
  void expire_codes(const std::string& serial);

  crypto::SeededRng rng_;
  crypto::AsymKeypair cloud_keypair_;
  Bytes sip_key_;
  std::map<std::string, InventoryRecord> inventory_;
  std::map<std::string, Account> accounts_;
  std::map<std::string, LinkCodeRecord> codes_;  // by code
  std::map<std::string, std::string> owners_;    // serial -> account
  std::map<std::string, crypto::PublicKey> device_keys_;
  std::map<std::string, Grant> factory_grants_;
  std::size_t regenerations_ = 0;
};

}  // namespace echotb::cloud
