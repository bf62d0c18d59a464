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

// Hand-rolled generators for property tests. Uses its own engine so the
// values do not depend on the library's seeded streams.

#include "echotb/bytes.hpp"

#include <random>
#include <string>

namespace echotb::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t u64() { return eng_(); }
  int range(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
  bool coin() { return range(0, 1) == 1; }

  std::string token(int min_len, int max_len) {
    static constexpr std::string_view kAlpha = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789-_.";
    std::string s;
    int n = range(min_len, max_len);
    for (int i = 0; i < n; ++i) s += kAlpha[range(0, static_cast<int>(kAlpha.size()) - 1)];
    return s;
  }

  std::string printable(int min_len, int max_len) {
    std::string s;
    int n = range(min_len, max_len);
    for (int i = 0; i < n; ++i) s += static_cast<char>(range(0x20, 0x7e));
    return s;
  }

  Bytes bytes(std::size_t n) {
    Bytes b(n);
    for (auto& x : b) x = static_cast<std::uint8_t>(range(0, 255));
    return b;
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace echotb::testing
