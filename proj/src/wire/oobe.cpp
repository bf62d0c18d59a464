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

#include "echotb/wire/oobe.hpp"

#include "echotb/error.hpp"

namespace echotb::wire {

namespace {

// Key order is fixed ("method" first) so encoded envelopes are stable and
// human-readable in traces.
Bytes envelope_body(const OobeEnvelope& env) {
  const auto& args = env.args.is_null() ? nlohmann::json::object() : env.args;
  std::string body = "{\"method\":" + nlohmann::json(env.method).dump() + ",\"args\":" + args.dump() + "}";
  return to_bytes(body);
}

OobeEnvelope envelope_from_body(const Bytes& body) {
  auto doc = nlohmann::json::parse(body.begin(), body.end(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw Error(Errc::malformed, "OOBE body is not a JSON object");
  auto method = doc.find("method");
  if (method == doc.end() || !method->is_string() || method->get<std::string>().empty())
    throw Error(Errc::malformed, "OOBE envelope missing method");
  OobeEnvelope env;
  env.method = method->get<std::string>();
  if (auto args = doc.find("args"); args != doc.end()) {
    if (!args->is_object()) throw Error(Errc::malformed, "OOBE args must be an object");
    env.args = *args;
  }
  return env;
}

}  // namespace

HttpMessage oobe_encode(const OobeEnvelope& env) {
  if (env.method.empty()) throw Error(Errc::invalid_argument, "empty OOBE method");
  if (!env.args.is_object() && !env.args.is_null()) throw Error(Errc::invalid_argument, "OOBE args must be an object");
  return make_http_request("POST", std::string(kOobePath), envelope_body(env));
}

OobeEnvelope oobe_decode(const HttpMessage& msg) {
  if (!msg.is_request() || msg.method != "POST") throw Error(Errc::malformed, "OOBE requires POST");
  if (msg.path != kOobePath) throw Error(Errc::wrong_path, msg.path);
  return envelope_from_body(msg.body);
}

HttpMessage oobe_encode_response(const OobeEnvelope& env, int status) {
  return make_http_response(status, status == 200 ? "OK" : "Bad Request", envelope_body(env));
}

OobeEnvelope oobe_decode_response(const HttpMessage& msg) {
  if (msg.is_request()) throw Error(Errc::malformed, "expected an OOBE response");
  return envelope_from_body(msg.body);
}

OobeEnvelope oobe_error(std::string method, std::string reason) {
  return OobeEnvelope{std::move(method), {{"error", std::move(reason)}}};
}

}  // namespace echotb::wire
