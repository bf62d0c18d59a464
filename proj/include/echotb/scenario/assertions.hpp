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

#include <json.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace echotb::scenario {

struct Verdict {
  bool pass = false;
  std::string kind;
  std::string label;
  std::string detail;
  std::optional<std::uint64_t> at_seq;  // first failing event, when there is one
};

// Resolves "${kind:arg}" references. Returns nullopt for unknown names.
using VarLookup = std::function<std::optional<std::string>(const std::string& kind, const std::string& arg)>;

// Throws Error(malformed) on an unknown or unresolvable reference.
std::string expand(const std::string& text, const VarLookup& lookup);

// Throws Error(malformed) if the assertion itself is ill-formed.
Verdict evaluate(const std::vector<netsim::TraceEvent>& events, const nlohmann::json& assertion,
                 const VarLookup& lookup = {});
std::vector<Verdict> evaluate_all(const std::vector<netsim::TraceEvent>& events, const nlohmann::json& assertions,
                                  const VarLookup& lookup = {});

// Checks shape only (kinds and required fields), no evaluation.
void validate(const nlohmann::json& assertion);

std::string describe(const Verdict& v);

}  // namespace echotb::scenario
