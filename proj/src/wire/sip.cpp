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

#include "echotb/wire/sip.hpp"

#include "echotb/error.hpp"
#include "message_text.hpp"

#include <array>
#include <charconv>

namespace echotb::wire {

namespace {

constexpr std::string_view kSipVersion = "SIP/2.0";
constexpr std::array<std::string_view, 5> kMandatory = {"Via", "From", "To", "Call-ID", "CSeq"};

struct CSeq {
  std::uint32_t number = 0;
  std::string method;
};

CSeq parse_cseq(std::string_view value) {
  auto sp = value.find(' ');
  if (sp == std::string_view::npos) throw Error(Errc::malformed, "bad CSeq '" + std::string(value) + "'");
  CSeq c;
  auto num = value.substr(0, sp);
  auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), c.number);
  if (num.empty() || ec != std::errc() || ptr != num.data() + num.size())
    throw Error(Errc::malformed, "bad CSeq number");
  c.method = std::string(detail::trim(value.substr(sp + 1)));
  if (!sip_method_supported(c.method)) throw Error(Errc::malformed, "bad CSeq method");
  return c;
}

void check_mandatory(const SipMessage& msg) {
  for (auto name : kMandatory) {
    if (!msg.headers.has(name)) throw Error(Errc::missing_header, std::string(name));
  }
  auto cseq = parse_cseq(*msg.headers.get("CSeq"));
  if (msg.is_request() && cseq.method != msg.method)
    throw Error(Errc::malformed, "bad CSeq: method differs from request line");
}

}  // namespace

bool sip_method_supported(std::string_view method) noexcept {
  return method == "REGISTER" || method == "INVITE" || method == "ACK" || method == "BYE" ||
         method == "CANCEL";
}

std::string_view sip_reason(int status) noexcept {
  switch (status) {
    case 100: return "Trying";
    case 180: return "Ringing";
    case 200: return "OK";
    case 403: return "Forbidden";
    case 404: return "Not Found";
    case 486: return "Busy Here";
    case 487: return "Request Terminated";
    default: return "Unknown";
  }
}

std::string SipMessage::cseq_method() const {
  auto v = headers.get("CSeq");
  return v ? parse_cseq(*v).method : std::string{};
}

std::uint32_t SipMessage::cseq_number() const {
  auto v = headers.get("CSeq");
  return v ? parse_cseq(*v).number : 0;
}

SipMessage sip_parse(ByteView bytes) {
  auto split = detail::split_message(bytes);
  SipMessage msg;
  auto parts = detail::split_spaces(split.start_line, 3);
  if (parts.size() != 3) throw Error(Errc::malformed, "start line '" + split.start_line + "'");
  if (parts[0] == kSipVersion) {
    msg.kind = SipMessage::Kind::response;
    int status = 0;
    auto [ptr, ec] = std::from_chars(parts[1].data(), parts[1].data() + parts[1].size(), status);
    if (parts[1].size() != 3 || ec != std::errc() || ptr != parts[1].data() + 3 || status < 100 || status > 699)
      throw Error(Errc::malformed, "status code");
    msg.status = status;
    msg.reason = std::string(parts[2]);
  } else {
    if (parts[2] != kSipVersion) throw Error(Errc::malformed, "unsupported SIP version");
    if (!sip_method_supported(parts[0])) throw Error(Errc::unsupported, "method " + std::string(parts[0]));
    if (parts[1].empty()) throw Error(Errc::malformed, "empty request URI");
    msg.kind = SipMessage::Kind::request;
    msg.method = std::string(parts[0]);
    msg.request_uri = std::string(parts[1]);
  }
  msg.headers = std::move(split.headers);
  if (msg.headers.get_all("Content-Length").size() > 1)
    throw Error(Errc::malformed, "repeated Content-Length");
  check_mandatory(msg);
  msg.body = detail::take_body(msg.headers, split.rest);
  return msg;
}

Bytes sip_serialize(const SipMessage& msg) {
  check_mandatory(msg);
  std::string out;
  if (msg.is_request()) {
    if (!sip_method_supported(msg.method)) throw Error(Errc::unsupported, "method " + msg.method);
    if (msg.request_uri.empty() || msg.request_uri.find_first_of(" \r\n") != std::string::npos)
      throw Error(Errc::malformed, "request URI");
    out = msg.method + " " + msg.request_uri + " " + std::string(kSipVersion) + "\r\n";
  } else {
    if (msg.status < 100 || msg.status > 699 || msg.reason.find_first_of("\r\n") != std::string::npos)
      throw Error(Errc::malformed, "status line");
    out = std::string(kSipVersion) + " " + std::to_string(msg.status) + " " + msg.reason + "\r\n";
  }
  detail::write_headers(out, msg.headers, msg.body.size());
  Bytes bytes = to_bytes(out);
  append(bytes, msg.body);
  return bytes;
}

std::string sip_uri_of(std::string_view name_addr) {
  auto lt = name_addr.find('<');
  if (lt != std::string_view::npos) {
    auto gt = name_addr.find('>', lt);
    if (gt == std::string_view::npos) throw Error(Errc::malformed, "unterminated name-addr");
    return std::string(name_addr.substr(lt + 1, gt - lt - 1));
  }
  auto semi = name_addr.find(';');
  return std::string(detail::trim(name_addr.substr(0, semi)));
}

std::optional<std::string> sip_tag_of(std::string_view name_addr) {
  auto gt = name_addr.find('>');
  auto params = gt == std::string_view::npos ? name_addr : name_addr.substr(gt);
  auto pos = params.find(";tag=");
  if (pos == std::string_view::npos) return std::nullopt;
  auto tag = params.substr(pos + 5);
  return std::string(tag.substr(0, tag.find(';')));
}

SipMessage make_sip_response(const SipMessage& request, int status, std::optional<std::string> to_tag) {
  SipMessage r;
  r.kind = SipMessage::Kind::response;
  r.status = status;
  r.reason = std::string(sip_reason(status));
  for (const auto& via : request.headers.get_all("Via")) r.headers.add("Via", via);
  r.headers.add("From", request.headers.get("From").value_or(""));
  std::string to = request.headers.get("To").value_or("");
  if (to_tag && !sip_tag_of(to)) to += ";tag=" + *to_tag;
  r.headers.add("To", to);
  r.headers.add("Call-ID", request.call_id());
  r.headers.add("CSeq", request.headers.get("CSeq").value_or(""));
  r.headers.add("Content-Length", "0");
  return r;
}

}  // namespace echotb::wire
