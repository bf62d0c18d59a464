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

#include "echotb/crypto/rng.hpp"

#include "echotb/crypto/primitives.hpp"
#include "echotb/error.hpp"

#include <memory>
#include <openssl/evp.h>

namespace echotb::crypto {

namespace {
constexpr std::size_t kChunk = 1024;

Bytes seed_key(std::uint64_t seed, std::string_view label) {
  Bytes material;
  put_u64(material, seed);
  append(material, to_bytes(label));
  return sha256(material);
}
}  // namespace

SeededRng::SeededRng(std::uint64_t seed, std::string_view label) : key_(seed_key(seed, label)) {}

SeededRng::SeededRng(const Bytes& key, int) : key_(key) {}

SeededRng SeededRng::derive(std::string_view label) const {
  Bytes material = key_;
  append(material, to_bytes(label));
  return SeededRng(sha256(material), 0);
}

void SeededRng::refill() {
  // ChaCha20 IV: 32-bit block counter (0) then a 96-bit nonce carrying the chunk number.
  std::uint8_t iv[16] = {};
  for (int i = 0; i < 8; ++i) iv[4 + i] = static_cast<std::uint8_t>(block_ >> (8 * i));
  ++block_;
  std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)> ctx(EVP_CIPHER_CTX_new(), EVP_CIPHER_CTX_free);
  Bytes zeros(kChunk, 0);
  buffer_.assign(kChunk, 0);
  int len = 0;
  if (!ctx || EVP_EncryptInit_ex(ctx.get(), EVP_chacha20(), nullptr, key_.data(), iv) != 1 ||
      EVP_EncryptUpdate(ctx.get(), buffer_.data(), &len, zeros.data(), static_cast<int>(kChunk)) != 1)
    throw Error(Errc::invalid_state, "chacha20 keystream");
  pos_ = 0;
}

void SeededRng::fill(std::span<std::uint8_t> out) {
  for (auto& b : out) {
    if (pos_ >= buffer_.size()) refill();
    b = buffer_[pos_++];
  }
}

Bytes SeededRng::bytes(std::size_t n) {
  Bytes out(n);
  fill(out);
  return out;
}

std::uint64_t SeededRng::next_u64() {
  std::uint8_t raw[8];
  fill(raw);
  std::uint64_t v = 0;
  for (auto b : raw) v = v << 8 | b;
  return v;
}

std::uint64_t SeededRng::uniform(std::uint64_t bound) {
  if (bound == 0) throw Error(Errc::invalid_argument, "uniform bound 0");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  for (;;) {
    auto v = next_u64();
    if (v < limit) return v % bound;
  }
}

}  // namespace echotb::crypto
