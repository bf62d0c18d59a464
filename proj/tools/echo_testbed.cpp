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

#include "echotb/error.hpp"
#include "echotb/scenario/scenario.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace echotb;
using nlohmann::json;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("ECHO_TESTBED_SEED");
  if (!raw || !*raw) return std::nullopt;
  try {
    std::size_t used = 0;
    auto v = std::stoull(raw, &used, 0);
    if (used != std::string(raw).size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw Error(Errc::invalid_argument, std::string("ECHO_TESTBED_SEED is not a number: ") + raw);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::not_found, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int report(const std::vector<scenario::Verdict>& verdicts) {
  bool ok = true;
  for (const auto& v : verdicts) {
    std::cout << scenario::describe(v) << "\n";
    ok = ok && v.pass;
  }
  return ok ? kExitPass : kExitFail;
}

int cmd_run(const std::string& name, std::optional<std::uint64_t> seed, std::string trace_path) {
  auto s = scenario::load(name);
  if (!seed) seed = env_seed();
  auto result = scenario::run(s, seed);
  if (trace_path.empty()) trace_path = s.name + ".trace.jsonl";
  std::ofstream out(trace_path, std::ios::binary);
  if (!out) throw Error(Errc::invalid_argument, "cannot write " + trace_path);
  out << result.trace.to_jsonl();
  out.close();
  std::cout << "scenario " << s.name << " seed " << result.seed << ": " << result.trace.size() << " events, "
            << result.scheduler_events << " scheduler steps, ended at " << result.end_ms << " ms\n";
  for (const auto& e : result.action_errors) std::cout << "action error: " << e << "\n";
  std::cout << "trace written to " << trace_path << "\n";
  return report(result.verdicts);
}

int cmd_assert(const std::string& trace_path, const std::string& assertions_path) {
  auto trace = netsim::Trace::from_jsonl(read_file(trace_path));
  json doc;
  try {
    doc = json::parse(read_file(assertions_path));
  } catch (const json::parse_error& e) {
    throw Error(Errc::malformed, std::string("assertions: ") + e.what());
  }
  // Accept a bare assertion, a list, or a whole scenario file.
  if (doc.is_object() && doc.contains("assertions")) doc = doc["assertions"];
  if (doc.is_object()) doc = json::array({doc});
  auto no_vars = [](const std::string&, const std::string&) -> std::optional<std::string> { return std::nullopt; };
  return report(scenario::evaluate_all(trace.events(), doc, no_vars));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic testbed for Echo pairing, AVS and calling protocols"};
  app.require_subcommand(1);

  std::string scenario_name;
  std::optional<std::uint64_t> seed;
  std::string trace_path;
  auto* run = app.add_subcommand("run", "Run a scenario, write its trace and check its assertions");
  run->add_option("scenario", scenario_name, "Built-in name or path to a scenario JSON file")->required();
  run->add_option("--seed", seed, "Seed override (default: ECHO_TESTBED_SEED, then the scenario's seed)");
  run->add_option("--trace", trace_path, "Trace output path (default: <name>.trace.jsonl)");

  auto* list = app.add_subcommand("list", "List built-in scenarios");

  std::string explain_name;
  auto* explain = app.add_subcommand("explain", "Describe a scenario");
  explain->add_option("name", explain_name)->required();

  std::string assert_trace;
  std::string assert_file;
  auto* check = app.add_subcommand("assert", "Evaluate assertions against a recorded trace");
  check->add_option("trace", assert_trace, "JSON-lines trace file")->required();
  check->add_option("assertions", assert_file, "JSON assertion, list of assertions, or scenario file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (*run) return cmd_run(scenario_name, seed, trace_path);
    if (*list) {
      for (const auto& n : scenario::builtin_names()) std::cout << n << "\n";
      return kExitPass;
    }
    if (*explain) {
      std::cout << scenario::explain(scenario::load(explain_name));
      return kExitPass;
    }
    if (*check) return cmd_assert(assert_trace, assert_file);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
