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

#include "echotb/calling/signaling.hpp"

namespace echotb::calling {

std::string sip_summary(const wire::SipMessage& msg) {
  if (msg.is_request()) return msg.method + " " + msg.request_uri;
  return std::to_string(msg.status) + " " + msg.reason + " (" + msg.cseq_method() + ")";
}

void send_sip(netsim::ChannelEnd& channel, const wire::SipMessage& msg, std::string_view note) {
  if (!channel.is_open()) return;
  std::string summary = sip_summary(msg);
  if (!note.empty()) summary += " " + std::string(note);
  channel.send(wire::sip_serialize(msg), netsim::Layer::sip, std::move(summary));
}

wire::SipMessage make_sip_request(std::string method, std::string request_uri, const SipDialogIds& ids,
                                  std::uint32_t cseq, std::string via) {
  wire::SipMessage m;
  m.kind = wire::SipMessage::Kind::request;
  m.method = method;
  m.request_uri = std::move(request_uri);
  m.headers.add("Via", std::move(via));
  m.headers.add("Max-Forwards", "70");
  m.headers.add("From", ids.from);
  m.headers.add("To", ids.to);
  m.headers.add("Call-ID", ids.call_id);
  m.headers.add("CSeq", std::to_string(cseq) + " " + method);
  return m;
}

std::string random_token(crypto::SeededRng& rng, std::size_t bytes) { return hex_encode(rng.bytes(bytes)); }

}  // namespace echotb::calling
