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

#include <stdexcept>
#include <string>
#include <string_view>

namespace echotb {

enum class Errc {
  malformed,
  missing_header,
  length_mismatch,
  injection,
  wrong_path,
  unsupported,
  wrong_length,
  unwrap_failed,
  bad_padding,
  truncated,
  auth_failed,
  replay,
  unknown_ssrc,
  counter_exhausted,
  bad_certificate,
  unreachable,
  refused,
  prefix_collision,
  already_attached,
  not_on_lan,
  wrong_ssid,
  torn_down,
  budget_exceeded,
  invalid_state,
  offline,
  unauthorized,
  already_registered,
  dead_code,
  bad_cookie,
  unknown_call,
  busy,
  not_found,
  forbidden,
  invalid_argument,
  timeout,
};

std::string_view to_string(Errc code) noexcept;

/// Structured failure carried by every fallible operation in the testbed.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}
  explicit Error(Errc code) : std::runtime_error(std::string(to_string(code))), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace echotb
