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

#include "echotb/crypto/rng.hpp"
#include "echotb/netsim/fabric.hpp"
#include "echotb/wire/sip.hpp"

#include <string>

namespace echotb::calling {

// "INVITE sip:..." for requests, "200 OK (INVITE)" for responses.
std::string sip_summary(const wire::SipMessage& msg);

// Sends on a registrar channel. No-op if the channel is already closed.
void send_sip(netsim::ChannelEnd& channel, const wire::SipMessage& msg, std::string_view note = {});

struct SipDialogIds {
  std::string call_id;
  std::string from;  // full name-addr with tag
  std::string to;    // full name-addr, tag once known
};

wire::SipMessage make_sip_request(std::string method, std::string request_uri, const SipDialogIds& ids,
                                  std::uint32_t cseq, std::string via);

std::string random_token(crypto::SeededRng& rng, std::size_t bytes = 6);

// Header that tells the callee how the registrar routed this leg.
inline constexpr std::string_view kCallTypeHeader = "X-calltype";

}  // namespace echotb::calling
