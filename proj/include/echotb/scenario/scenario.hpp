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

#include "echotb/netsim/trace.hpp"
#include "echotb/scenario/assertions.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace echotb::scenario {

struct Scenario {
  std::string name;
  std::string description;
  std::string flow;                 // protocol flow the scenario exercises
  std::vector<std::string> covers;  // behaviours it demonstrates
  std::uint64_t seed = 1;
  nlohmann::json topology = nlohmann::json::object();
  nlohmann::json actions = nlohmann::json::array();
  nlohmann::json assertions = nlohmann::json::array();

  // Throws Error(malformed) on schema violations.
  static Scenario parse(const nlohmann::json& doc);
  static Scenario parse_text(std::string_view text);
};

std::vector<std::string> builtin_names();
// Throws Error(not_found).
Scenario builtin(const std::string& name);
// A built-in name or a path to a scenario file. Throws not_found / malformed.
Scenario load(const std::string& name_or_path);
std::string explain(const Scenario& s);

struct RunResult {
  std::string name;
  std::uint64_t seed = 0;
  netsim::Trace trace;
  std::vector<Verdict> verdicts;
  std::size_t scheduler_events = 0;
  std::uint64_t end_ms = 0;
  std::vector<std::string> action_errors;

  bool passed() const;
};

RunResult run(const Scenario& s, std::optional<std::uint64_t> seed_override = std::nullopt);

}  // namespace echotb::scenario
