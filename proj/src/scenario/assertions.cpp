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

#include "echotb/scenario/assertions.hpp"

#include "echotb/error.hpp"

#include <algorithm>
#include <regex>

namespace echotb::scenario {

using nlohmann::json;
using netsim::TraceEvent;

namespace {

const std::vector<std::string> kKinds = {"ordered", "absent",   "present",  "count",   "locality",
                                         "equals",  "not_equals", "contains", "excludes"};

std::regex compile(const std::string& pattern) {
  try {
    return std::regex(pattern, std::regex::ECMAScript);
  } catch (const std::regex_error& e) {
    throw Error(Errc::malformed, "bad pattern '" + pattern + "': " + e.what());
  }
}

std::string str_field(const json& j, const char* key, const std::string& fallback = {}) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  if (!it->is_string()) throw Error(Errc::malformed, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

// Event filter shared by every kind: layer, summary regex, lan, src/dst regex.
struct Filter {
  std::optional<netsim::Layer> layer;
  std::optional<std::regex> summary;
  std::optional<std::string> lan;
  std::optional<std::regex> src;
  std::optional<std::regex> dst;
  std::string text;

  Filter(const json& j, const VarLookup& lookup) {
    if (auto l = str_field(j, "layer"); !l.empty()) {
      try {
        layer = netsim::layer_from(l);
      } catch (const Error&) {
        throw Error(Errc::malformed, "unknown layer '" + l + "'");
      }
      text += l;
    }
    if (auto s = str_field(j, "summary"); !s.empty()) {
      auto expanded = expand(s, lookup);
      summary = compile(expanded);
      text += (text.empty() ? "" : " ") + std::string("/") + expanded + "/";
    }
    if (auto l = str_field(j, "lan"); !l.empty()) {
      lan = expand(l, lookup);
      text += " @" + *lan;
    }
    if (auto s = str_field(j, "src"); !s.empty()) src = compile(expand(s, lookup));
    if (auto d = str_field(j, "dst"); !d.empty()) dst = compile(expand(d, lookup));
  }

  bool match(const TraceEvent& e) const {
    if (layer && e.layer != *layer) return false;
    if (lan && e.lan != *lan) return false;
    if (summary && !std::regex_search(e.summary, *summary)) return false;
    if (src && !std::regex_search(e.src, *src)) return false;
    if (dst && !std::regex_search(e.dst, *dst)) return false;
    return true;
  }
};

Verdict ordered(const std::vector<TraceEvent>& events, const json& a, const VarLookup& lookup) {
  Verdict v;
  std::vector<Filter> steps;
  for (const auto& s : a.at("steps")) steps.emplace_back(s, lookup);
  std::size_t at = 0;
  std::optional<std::uint64_t> last;
  for (const auto& e : events) {
    if (at < steps.size() && steps[at].match(e)) {
      last = e.seq;
      ++at;
    }
  }
  v.pass = at == steps.size();
  if (!v.pass) {
    v.detail = "step " + std::to_string(at + 1) + "/" + std::to_string(steps.size()) + " (" + steps[at].text +
               ") not found" + (last ? " after seq " + std::to_string(*last) : "");
    v.at_seq = last;
  } else {
    v.detail = std::to_string(steps.size()) + " steps in order";
  }
  return v;
}

Verdict payload_scan(const std::vector<TraceEvent>& events, const json& a, const VarLookup& lookup, bool want) {
  Verdict v;
  std::string pattern = expand(str_field(a, "pattern"), lookup);
  if (pattern.empty()) throw Error(Errc::malformed, "empty payload pattern");
  Filter f(a, lookup);
  Bytes needle = to_bytes(pattern);
  std::size_t hits = 0;
  for (const auto& e : events) {
    if (!f.match(e) || !e.payload || !contains(*e.payload, needle)) continue;
    if (!hits) v.at_seq = e.seq;
    ++hits;
  }
  v.pass = want ? hits > 0 : hits == 0;
  std::string where = f.text.empty() ? "" : " in " + f.text;
  v.detail = std::to_string(hits) + " payload(s) contain the pattern" + where;
  if (want && !hits) v.at_seq.reset();
  return v;
}

Verdict count(const std::vector<TraceEvent>& events, const json& a, const VarLookup& lookup) {
  Verdict v;
  Filter f(a, lookup);
  std::size_t n = 0;
  for (const auto& e : events) n += f.match(e) ? 1 : 0;
  bool any = false;
  v.pass = true;
  auto bound = [&](const char* key) -> std::optional<std::size_t> {
    if (!a.contains(key)) return std::nullopt;
    any = true;
    return a.at(key).get<std::size_t>();
  };
  auto eq = bound("equals");
  auto lo = bound("min");
  auto hi = bound("max");
  if (!any) throw Error(Errc::malformed, "count needs equals, min or max");
  if (eq && n != *eq) v.pass = false;
  if (lo && n < *lo) v.pass = false;
  if (hi && n > *hi) v.pass = false;
  v.detail = "count(" + f.text + ") = " + std::to_string(n);
  if (eq) v.detail += ", want " + std::to_string(*eq);
  if (lo) v.detail += ", want >= " + std::to_string(*lo);
  if (hi) v.detail += ", want <= " + std::to_string(*hi);
  return v;
}

Verdict locality(const std::vector<TraceEvent>& events, const json& a, const VarLookup& lookup) {
  Verdict v;
  Filter f(a, lookup);
  std::vector<std::string> allowed;
  for (const auto& l : a.at("lans")) allowed.push_back(expand(l.get<std::string>(), lookup));
  std::size_t seen = 0;
  v.pass = true;
  for (const auto& e : events) {
    if (!f.match(e)) continue;
    ++seen;
    if (std::find(allowed.begin(), allowed.end(), e.lan) == allowed.end()) {
      v.pass = false;
      v.at_seq = e.seq;
      v.detail = "event on lan '" + e.lan + "' outside the allowed set";
      return v;
    }
  }
  if (a.value("require_any", true) && !seen) {
    v.pass = false;
    v.detail = "no matching events";
    return v;
  }
  v.detail = std::to_string(seen) + " event(s) stay on the allowed lans";
  return v;
}

Verdict compare(const json& a, const VarLookup& lookup, const std::string& kind) {
  Verdict v;
  std::string left = expand(str_field(a, "left"), lookup);
  std::string right = expand(str_field(a, kind == "equals" || kind == "not_equals" ? "right" : "pattern"), lookup);
  if (kind == "equals") v.pass = left == right;
  if (kind == "not_equals") v.pass = left != right;
  if (kind == "contains") v.pass = left.find(right) != std::string::npos;
  if (kind == "excludes") v.pass = !right.empty() && left.find(right) == std::string::npos;
  auto clip = [](std::string s) {
    for (auto& c : s) c = c == '\n' ? ' ' : c;
    return s.size() > 48 ? s.substr(0, 45) + "..." : s;
  };
  v.detail = "'" + clip(left) + "' " + kind + " '" + clip(right) + "'";
  return v;
}

}  // namespace

std::string expand(const std::string& text, const VarLookup& lookup) {
  std::string out;
  std::size_t pos = 0;
  while (true) {
    auto start = text.find("${", pos);
    if (start == std::string::npos) {
      out += text.substr(pos);
      return out;
    }
    auto end = text.find('}', start);
    if (end == std::string::npos) throw Error(Errc::malformed, "unterminated reference in '" + text + "'");
    out += text.substr(pos, start - pos);
    std::string ref = text.substr(start + 2, end - start - 2);
    auto colon = ref.find(':');
    if (colon == std::string::npos) throw Error(Errc::malformed, "reference '" + ref + "' needs kind:arg");
    std::optional<std::string> value;
    if (lookup) value = lookup(ref.substr(0, colon), ref.substr(colon + 1));
    if (!value) throw Error(Errc::malformed, "cannot resolve ${" + ref + "}");
    out += *value;
    pos = end + 1;
  }
}

void validate(const json& a) {
  if (!a.is_object()) throw Error(Errc::malformed, "assertion must be an object");
  std::string kind = str_field(a, "kind");
  if (std::find(kKinds.begin(), kKinds.end(), kind) == kKinds.end()) {
    throw Error(Errc::malformed, "unknown assertion kind '" + kind + "'");
  }
  auto need = [&](const char* key) {
    if (!a.contains(key)) throw Error(Errc::malformed, kind + " assertion needs '" + key + "'");
  };
  if (kind == "ordered") {
    need("steps");
    if (!a["steps"].is_array() || a["steps"].empty()) throw Error(Errc::malformed, "steps must be a non-empty array");
  } else if (kind == "absent" || kind == "present") {
    need("pattern");
  } else if (kind == "locality") {
    need("lans");
  } else if (kind == "equals" || kind == "not_equals") {
    need("left");
    need("right");
  } else if (kind == "contains" || kind == "excludes") {
    need("left");
    need("pattern");
  }
}

Verdict evaluate(const std::vector<TraceEvent>& events, const json& a, const VarLookup& lookup) {
  validate(a);
  std::string kind = a["kind"].get<std::string>();
  Verdict v;
  try {
    if (kind == "ordered") {
      v = ordered(events, a, lookup);
    } else if (kind == "absent") {
      v = payload_scan(events, a, lookup, false);
    } else if (kind == "present") {
      v = payload_scan(events, a, lookup, true);
    } else if (kind == "count") {
      v = count(events, a, lookup);
    } else if (kind == "locality") {
      v = locality(events, a, lookup);
    } else {
      v = compare(a, lookup, kind);
    }
  } catch (const json::exception& e) {
    throw Error(Errc::malformed, kind + " assertion: " + e.what());
  }
  v.kind = kind;
  v.label = str_field(a, "label", kind);
  return v;
}

std::vector<Verdict> evaluate_all(const std::vector<TraceEvent>& events, const json& assertions,
                                  const VarLookup& lookup) {
  if (!assertions.is_array()) throw Error(Errc::malformed, "assertions must be an array");
  std::vector<Verdict> out;
  for (const auto& a : assertions) out.push_back(evaluate(events, a, lookup));
  return out;
}

std::string describe(const Verdict& v) {
  std::string s = std::string(v.pass ? "PASS" : "FAIL") + " " + v.label + ": " + v.detail;
  if (!v.pass && v.at_seq) s += " [seq " + std::to_string(*v.at_seq) + "]";
  return s;
}

}  // namespace echotb::scenario
