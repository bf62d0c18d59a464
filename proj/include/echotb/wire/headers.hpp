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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace echotb::wire {

struct Header {
  std::string name;
  std::string value;
  bool operator==(const Header&) const = default;
};

bool iequals(std::string_view a, std::string_view b) noexcept;

/// Ordered, repeatable header list. Lookup is case-insensitive; serialization
/// keeps insertion order and the original spelling of each name.
class HeaderList {
 public:
  HeaderList() = default;
  HeaderList(std::initializer_list<Header> init) : items_(init) {}

  void add(std::string name, std::string value) { items_.push_back({std::move(name), std::move(value)}); }
  // Replaces the first occurrence in place, or appends.
  void set(std::string_view name, std::string value);
  void prepend(std::string name, std::string value);
  std::size_t remove(std::string_view name);
  // Removes only the first occurrence.
  bool remove_first(std::string_view name);

  std::optional<std::string> get(std::string_view name) const;
  std::vector<std::string> get_all(std::string_view name) const;
  bool has(std::string_view name) const { return get(name).has_value(); }

  const std::vector<Header>& items() const noexcept { return items_; }
  std::size_t size() const noexcept { return items_.size(); }

  bool operator==(const HeaderList&) const = default;

 private:
  std::vector<Header> items_;
};

// Shared by the HTTP and SIP serializers.
void check_header_safe(const Header& h);

}  // namespace echotb::wire
