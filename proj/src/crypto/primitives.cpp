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

#include "echotb/crypto/primitives.hpp"

#include "echotb/error.hpp"

#include <memory>
#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>

namespace echotb::crypto {

namespace {

using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)>;

CipherCtx new_ctx() {
  CipherCtx ctx(EVP_CIPHER_CTX_new(), EVP_CIPHER_CTX_free);
  if (!ctx) throw Error(Errc::invalid_state, "EVP_CIPHER_CTX_new");
  return ctx;
}

void check_key_iv(ByteView key, ByteView iv) {
  if (key.size() != kAesKeyLen) throw Error(Errc::wrong_length, "AES-256 key must be 32 bytes");
  if (iv.size() != kAesBlock) throw Error(Errc::wrong_length, "IV must be 16 bytes");
}

Bytes run_cipher(const EVP_CIPHER* cipher, bool encrypt, bool padding, ByteView key, ByteView iv, ByteView in) {
  check_key_iv(key, iv);
  auto ctx = new_ctx();
  if (EVP_CipherInit_ex(ctx.get(), cipher, nullptr, key.data(), iv.data(), encrypt ? 1 : 0) != 1)
    throw Error(Errc::invalid_state, "cipher init");
  EVP_CIPHER_CTX_set_padding(ctx.get(), padding ? 1 : 0);
  Bytes out(in.size() + kAesBlock);
  int n1 = 0, n2 = 0;
  if (EVP_CipherUpdate(ctx.get(), out.data(), &n1, in.data(), static_cast<int>(in.size())) != 1)
    throw Error(Errc::invalid_state, "cipher update");
  if (EVP_CipherFinal_ex(ctx.get(), out.data() + n1, &n2) != 1) throw Error(Errc::bad_padding);
  out.resize(static_cast<std::size_t>(n1 + n2));
  return out;
}

Bytes hmac(const EVP_MD* md, ByteView key, ByteView data) {
  Bytes out(EVP_MAX_MD_SIZE);
  unsigned int len = 0;
  if (!HMAC(md, key.data(), static_cast<int>(key.size()), data.data(), data.size(), out.data(), &len))
    throw Error(Errc::invalid_state, "HMAC");
  out.resize(len);
  return out;
}

}  // namespace

Bytes aes256_cbc_encrypt(ByteView key, ByteView iv, ByteView plaintext) {
  return run_cipher(EVP_aes_256_cbc(), true, true, key, iv, plaintext);
}

Bytes aes256_cbc_decrypt(ByteView key, ByteView iv, ByteView ciphertext) {
  if (ciphertext.empty() || ciphertext.size() % kAesBlock != 0)
    throw Error(Errc::truncated, "CBC ciphertext is not a positive multiple of 16");
  return run_cipher(EVP_aes_256_cbc(), false, true, key, iv, ciphertext);
}

Bytes aes256_cbc_encrypt_blocks(ByteView key, ByteView iv, ByteView plaintext) {
  if (plaintext.size() % kAesBlock != 0) throw Error(Errc::wrong_length, "unpadded CBC input");
  return run_cipher(EVP_aes_256_cbc(), true, false, key, iv, plaintext);
}

Bytes aes256_ctr(ByteView key, ByteView counter_block, ByteView data) {
  return run_cipher(EVP_aes_256_ctr(), true, false, key, counter_block, data);
}

Bytes sha256(ByteView data) {
  Bytes out(32);
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1)
    throw Error(Errc::invalid_state, "SHA-256");
  return out;
}

Bytes hmac_sha256(ByteView key, ByteView data) { return hmac(EVP_sha256(), key, data); }
Bytes hmac_sha1(ByteView key, ByteView data) { return hmac(EVP_sha1(), key, data); }

bool constant_time_equal(ByteView a, ByteView b) noexcept {
  return a.size() == b.size() && CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

}  // namespace echotb::crypto
