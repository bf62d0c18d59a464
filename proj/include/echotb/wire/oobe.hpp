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

#include "echotb/wire/http.hpp"

#include <json.hpp>
#include <string>

namespace echotb::wire {

inline constexpr std::string_view kOobePath = "/OOBE";
inline constexpr std::uint16_t kOobePort = 8080;

// JSON stand-in for the device's Thrift envelope: {"method": ..., "args": {...}}.
struct OobeEnvelope {
  std::string method;
  nlohmann::json args = nlohmann::json::object();

  bool operator==(const OobeEnvelope&) const = default;
};

HttpMessage oobe_encode(const OobeEnvelope& env);
OobeEnvelope oobe_decode(const HttpMessage& msg);

// Responses reuse the envelope shape; status 200 for results, 400 for errors.
HttpMessage oobe_encode_response(const OobeEnvelope& env, int status = 200);
OobeEnvelope oobe_decode_response(const HttpMessage& msg);

OobeEnvelope oobe_error(std::string method, std::string reason);
inline bool oobe_is_error(const OobeEnvelope& env) { return env.args.contains("error"); }

}  // namespace echotb::wire
