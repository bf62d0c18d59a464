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

#include "echotb/bytes.hpp"

#include <cstdint>
#include <string_view>

namespace echotb::crypto {

/// Deterministic byte source: a ChaCha20 keystream keyed by
/// SHA-256(seed || label). Every key, IV and nonce in the testbed is drawn
/// from one of these; nothing reads ambient entropy.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed, std::string_view label = "root");

  void fill(std::span<std::uint8_t> out);
  Bytes bytes(std::size_t n);
  std::uint64_t next_u64();
  // Uniform in [0, bound) by rejection sampling.
  std::uint64_t uniform(std::uint64_t bound);

  // Independent stream for a named sub-component.
  SeededRng derive(std::string_view label) const;

 private:
  SeededRng(const Bytes& key, int);
  void refill();

  Bytes key_;
  std::uint64_t block_ = 0;
  Bytes buffer_;
  std::size_t pos_ = 0;
};

}  // namespace echotb::crypto
