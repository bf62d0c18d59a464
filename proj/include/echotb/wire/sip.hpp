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
#include "echotb/wire/headers.hpp"

#include <optional>
#include <string>

namespace echotb::wire {

/// SIP subset: REGISTER, INVITE, ACK, BYE, CANCEL and final/provisional
/// responses. Extension headers (Path, Supported, X-authtoken, ...) are
/// carried verbatim.
struct SipMessage {
  enum class Kind { request, response };

  Kind kind = Kind::request;
  std::string method;       // requests
  std::string request_uri;  // requests
  int status = 0;           // responses
  std::string reason;       // responses
  HeaderList headers;
  Bytes body;

  bool is_request() const noexcept { return kind == Kind::request; }
  std::string call_id() const { return headers.get("Call-ID").value_or(""); }
  // The method named in CSeq; for responses this identifies the transaction.
  std::string cseq_method() const;
  std::uint32_t cseq_number() const;
  bool operator==(const SipMessage&) const = default;
};

SipMessage sip_parse(ByteView bytes);
Bytes sip_serialize(const SipMessage& msg);

bool sip_method_supported(std::string_view method) noexcept;
std::string_view sip_reason(int status) noexcept;

// "Alice <sip:a@x>;tag=1" -> "sip:a@x"
std::string sip_uri_of(std::string_view name_addr);
std::optional<std::string> sip_tag_of(std::string_view name_addr);

// Builds a response that mirrors Via/From/To/Call-ID/CSeq of the request.
SipMessage make_sip_response(const SipMessage& request, int status,
                             std::optional<std::string> to_tag = std::nullopt);

}  // namespace echotb::wire
