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

#include <cstdint>
#include <set>
#include <string>

namespace echotb::crypto {

enum class CallType { regular, intercom };
using echotb::to_string;
std::string_view to_string(CallType t) noexcept;
CallType call_type_from(std::string_view s);

/// Single-use call authorization, bound to the exact caller and callee URIs.
struct CallAuthToken {
  std::string caller;
  std::string callee;
  CallType type = CallType::regular;
  std::int64_t issued_at = 0;
  std::int64_t ttl = 0;
  Bytes nonce;  // 16 bytes
  Bytes signature;

  Bytes signed_bytes() const;
  // Header form for X-authtoken.
  std::string encode() const;
  static CallAuthToken decode(std::string_view text);
  bool operator==(const CallAuthToken&) const = default;
};

/// Nonces of every token whose signature has verified. Shared by all calls
/// a registrar handles.
class NonceCache {
 public:
  bool seen(const Bytes& nonce) const { return nonces_.contains(nonce); }
  void record(const Bytes& nonce) { nonces_.insert(nonce); }
  std::size_t size() const noexcept { return nonces_.size(); }

 private:
  std::set<Bytes> nonces_;
};

CallAuthToken mint_call_token(const AsymKeypair& account_key, std::string caller, std::string callee,
                              CallType type, std::int64_t ttl, std::int64_t now, SeededRng& rng);

// True iff the signature verifies, both URIs match exactly, now < issued+ttl
// and the nonce is unseen. A token with a valid signature has its nonce burned
// on the first verify attempt, whatever the outcome.
bool verify_call_token(const PublicKey& account_public, const CallAuthToken& token, std::string_view caller,
                       std::string_view callee, std::int64_t now, NonceCache& cache);

}  // namespace echotb::crypto
