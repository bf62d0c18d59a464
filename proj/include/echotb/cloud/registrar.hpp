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

#include "echotb/cloud/services.hpp"
#include "echotb/crypto/call_token.hpp"
#include "echotb/netsim/fabric.hpp"
#include "echotb/wire/sip.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace echotb::cloud {

inline constexpr std::int64_t kBindingExpirySeconds = 3600;

struct SipBinding {
  std::string account_uri;
  std::string device_uri;
  std::string contact;
  netsim::ChannelEnd channel;
  std::int64_t expires = 0;
};

// SDES key material the registrar saw in transit.
struct RecordedKey {
  std::string call_id;
  std::string role;  // offer | answer
  Bytes key_salt;
  std::uint32_t ssrc = 0;
};

/// SIP registrar and forking proxy on the cloud's port 443.
class Registrar {
 public:
  Registrar(netsim::Fabric& fabric, netsim::HostId host, AccountService& accounts, crypto::SeededRng rng);

  void set_gateway(netsim::Endpoint gateway) { gateway_ = std::move(gateway); }

  const std::map<std::string, SipBinding>& bindings() const noexcept { return bindings_; }  // by device URI
  std::vector<const SipBinding*> live_bindings(std::string_view account_uri) const;
  const std::vector<RecordedKey>& recorded_keys() const noexcept { return recorded_; }
  std::size_t legs_forwarded(const std::string& call_id) const;
  std::size_t cancels_sent() const noexcept { return cancels_sent_; }
  const crypto::NonceCache& nonces() const noexcept { return nonces_; }

 private:
  struct Leg {
    netsim::ChannelEnd channel;
    std::string target;
    std::string branch;
    wire::SipMessage invite;
    bool done = false;
    bool cancelled = false;
    int status = 0;
  };
  struct CallRecord {
    netsim::ChannelEnd caller;
    wire::SipMessage invite;
    std::vector<Leg> legs;
    std::optional<std::size_t> winner;
    bool caller_cancelled = false;
    bool final_sent = false;
  };

  void adopt(netsim::ChannelEnd channel);
  void on_message(netsim::ChannelEnd channel, const Bytes& data);
  void on_register(netsim::ChannelEnd& channel, const wire::SipMessage& msg);
  void on_invite(netsim::ChannelEnd& channel, const wire::SipMessage& msg);
  void on_in_dialog(netsim::ChannelEnd& channel, const wire::SipMessage& msg);
  void on_cancel(netsim::ChannelEnd& channel, const wire::SipMessage& msg);
  void on_response(netsim::ChannelEnd& channel, wire::SipMessage msg);
  void reject(netsim::ChannelEnd& channel, const wire::SipMessage& request, int status, const std::string& why);
  void cancel_leg(const std::string& call_id, Leg& leg, std::size_t index);
  void record_key(const std::string& call_id, const std::string& role, const wire::SipMessage& msg);
  bool is_live(const SipBinding& b) const;
  std::string via() ;

  netsim::Fabric& fabric_;
  netsim::HostId host_;
  AccountService& accounts_;
  crypto::SeededRng rng_;
  std::optional<netsim::Endpoint> gateway_;
  std::map<std::string, SipBinding> bindings_;
  std::map<std::string, CallRecord> calls_;
  crypto::NonceCache nonces_;
  std::vector<RecordedKey> recorded_;
  std::size_t cancels_sent_ = 0;
};

}  // namespace echotb::cloud
