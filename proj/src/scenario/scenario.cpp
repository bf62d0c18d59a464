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

#include "echotb/scenario/scenario.hpp"

#include "echotb/error.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <utility>

namespace echotb::scenario {

using nlohmann::json;

namespace {

const std::vector<std::pair<std::string, std::string>> kBuiltins = {
#include "builtin_scenarios.inc"
};

const std::set<std::string> kTopLevel = {"$schema", "name",    "description", "flow",      "covers",
                                         "seed",    "topology", "actions",     "assertions"};

const std::map<std::string, std::vector<std::string>> kActions = {
    {"login", {"client", "account"}},
    {"enter_pairing", {"device"}},
    {"pair", {"client", "device", "wifi"}},
    {"eavesdrop", {"attacker", "device"}},
    {"arm_hijack", {"attacker", "account"}},
    {"deregister", {"device"}},
    {"begin_call", {"caller", "type"}},
    {"accept_call", {"device"}},
    {"end_call", {"device"}},
    {"talk", {"device", "frames"}},
    {"replay_negotiation", {"probe", "device"}},
    {"drop_registrar", {"device"}},
};

}  // namespace

Scenario Scenario::parse(const json& doc) {
  if (!doc.is_object()) throw Error(Errc::malformed, "scenario must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!kTopLevel.contains(key)) throw Error(Errc::malformed, "unknown scenario field '" + key + "'");
  }
  Scenario s;
  try {
    s.name = doc.at("name").get<std::string>();
    s.description = doc.value("description", "");
    s.flow = doc.value("flow", "");
    s.covers = doc.value("covers", std::vector<std::string>{});
    s.seed = doc.value("seed", std::uint64_t{1});
    s.topology = doc.value("topology", json::object());
    s.actions = doc.value("actions", json::array());
    s.assertions = doc.value("assertions", json::array());
  } catch (const json::exception& e) {
    throw Error(Errc::malformed, std::string("scenario: ") + e.what());
  }
  if (s.name.empty()) throw Error(Errc::malformed, "scenario name is empty");
  if (!s.topology.is_object()) throw Error(Errc::malformed, "topology must be an object");
  if (!s.actions.is_array()) throw Error(Errc::malformed, "actions must be an array");
  if (!s.assertions.is_array()) throw Error(Errc::malformed, "assertions must be an array");
  for (const auto& a : s.actions) {
    if (!a.is_object() || !a.contains("do") || !a["do"].is_string()) {
      throw Error(Errc::malformed, "every action needs a 'do' string");
    }
    auto kind = a["do"].get<std::string>();
    auto it = kActions.find(kind);
    if (it == kActions.end()) throw Error(Errc::malformed, "unknown action '" + kind + "'");
    for (const auto& field : it->second) {
      if (!a.contains(field)) throw Error(Errc::malformed, kind + " action needs '" + field + "'");
    }
    if (a.contains("at") && !a["at"].is_number_unsigned()) throw Error(Errc::malformed, "'at' must be a non-negative integer");
  }
  for (const auto& a : s.assertions) validate(a);
  return s;
}

Scenario Scenario::parse_text(std::string_view text) {
  auto doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw Error(Errc::malformed, "scenario is not valid JSON");
  return parse(doc);
}

std::vector<std::string> builtin_names() {
  std::vector<std::string> out;
  for (const auto& [name, body] : kBuiltins) out.push_back(name);
  return out;
}

Scenario builtin(const std::string& name) {
  for (const auto& [n, body] : kBuiltins) {
    if (n == name) return Scenario::parse_text(body);
  }
  throw Error(Errc::not_found, "no built-in scenario '" + name + "'");
}

Scenario load(const std::string& name_or_path) {
  for (const auto& [n, body] : kBuiltins) {
    if (n == name_or_path) return Scenario::parse_text(body);
  }
  std::ifstream in(name_or_path);
  if (!in) throw Error(Errc::not_found, "no built-in scenario or file '" + name_or_path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return Scenario::parse_text(buf.str());
}

std::string explain(const Scenario& s) {
  std::string out = s.name + "\n";
  if (!s.flow.empty()) out += "  flow: " + s.flow + "\n";
  if (!s.description.empty()) out += "  " + s.description + "\n";
  for (const auto& c : s.covers) out += "  - " + c + "\n";
  out += "  actions: " + std::to_string(s.actions.size()) + ", assertions: " + std::to_string(s.assertions.size()) +
         ", default seed: " + std::to_string(s.seed) + "\n";
  return out;
}

bool RunResult::passed() const {
  for (const auto& v : verdicts) {
    if (!v.pass) return false;
  }
  return true;
}

}  // namespace echotb::scenario
