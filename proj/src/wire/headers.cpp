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

#include "echotb/wire/headers.hpp"

#include "echotb/error.hpp"

#include <algorithm>
#include <cctype>

namespace echotb::wire {

bool iequals(std::string_view a, std::string_view b) noexcept {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

void HeaderList::set(std::string_view name, std::string value) {
  for (auto& h : items_) {
    if (iequals(h.name, name)) {
      h.value = std::move(value);
      return;
    }
  }
  items_.push_back({std::string(name), std::move(value)});
}

void HeaderList::prepend(std::string name, std::string value) {
  items_.insert(items_.begin(), Header{std::move(name), std::move(value)});
}

std::size_t HeaderList::remove(std::string_view name) {
  return std::erase_if(items_, [&](const Header& h) { return iequals(h.name, name); });
}

bool HeaderList::remove_first(std::string_view name) {
  auto it = std::find_if(items_.begin(), items_.end(),
                         [&](const Header& h) { return iequals(h.name, name); });
  if (it == items_.end()) return false;
  items_.erase(it);
  return true;
}

std::optional<std::string> HeaderList::get(std::string_view name) const {
  for (const auto& h : items_)
    if (iequals(h.name, name)) return h.value;
  return std::nullopt;
}

std::vector<std::string> HeaderList::get_all(std::string_view name) const {
  std::vector<std::string> out;
  for (const auto& h : items_)
    if (iequals(h.name, name)) out.push_back(h.value);
  return out;
}

void check_header_safe(const Header& h) {
  if (h.name.empty()) throw Error(Errc::malformed, "empty header name");
  for (char c : h.name) {
    if (c == ':' || std::isspace(static_cast<unsigned char>(c)) || std::iscntrl(static_cast<unsigned char>(c)))
      throw Error(Errc::injection, "header name '" + h.name + "'");
  }
  if (h.value.find_first_of("\r\n") != std::string::npos)
    throw Error(Errc::injection, "CR/LF in value of " + h.name);
}

}  // namespace echotb::wire
