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

#include "echotb/crypto/auth_token.hpp"
#include "echotb/crypto/call_token.hpp"
#include "echotb/crypto/credential.hpp"
#include "echotb/crypto/keys.hpp"
#include "echotb/crypto/primitives.hpp"
#include "echotb/crypto/rng.hpp"
#include "echotb/crypto/srtp.hpp"
#include "echotb/error.hpp"
#include "support/generators.hpp"

#include <gtest/gtest.h>

namespace echotb::crypto {
namespace {

using echotb::testing::Gen;

// Known answers produced ahead of time with Python's `cryptography` package
// (an independent AES implementation), not with this library.
constexpr std::string_view kZeroKeyZeroIvZeroBlock = "dc95c078a2408989ad48a21492842087";
constexpr std::string_view kCountingKeyCiphertext =
    "28485d17b78ad8149a420af929d293431a772ff0fd4423bed2ecf5c9e327d7aa";

Bytes counting(std::size_t n) {
  Bytes b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = static_cast<std::uint8_t>(i);
  return b;
}

TEST(Aes, ZeroVectorMatchesReference) {
  auto ct = aes256_cbc_encrypt_blocks(Bytes(32, 0), Bytes(16, 0), Bytes(16, 0));
  EXPECT_EQ(hex_encode(ct), kZeroKeyZeroIvZeroBlock);
}

TEST(Aes, TwoBlockVectorMatchesReference) {
  auto ct = aes256_cbc_encrypt_blocks(counting(32), counting(16), to_bytes("Wi-Fi credential block oracle!!!"));
  EXPECT_EQ(hex_encode(ct), kCountingKeyCiphertext);
}

TEST(Aes, PaddedRoundTripAndBadPadding) {
  Bytes key = counting(32), iv = counting(16);
  auto ct = aes256_cbc_encrypt(key, iv, to_bytes("hello"));
  EXPECT_EQ(ct.size(), 16u);
  EXPECT_EQ(to_string(aes256_cbc_decrypt(key, iv, ct)), "hello");
  Bytes other_key(32, 9);
  // A wrong key almost always yields invalid padding; a lucky pad byte still
  // cannot reproduce the plaintext.
  try {
    EXPECT_NE(to_string(aes256_cbc_decrypt(other_key, iv, ct)), "hello");
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::bad_padding);
  }
}

TEST(Rng, SameSeedSameStreamDifferentLabelDifferentStream) {
  SeededRng a(1), b(1), c(2);
  EXPECT_EQ(a.bytes(100), b.bytes(100));
  EXPECT_NE(SeededRng(1).bytes(32), c.bytes(32));
  EXPECT_NE(SeededRng(1).derive("x").bytes(32), SeededRng(1).derive("y").bytes(32));
  SeededRng u(3);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(u.uniform(36), 36u);
}

TEST(Keys, KeygenIsDeterministic) {
  SeededRng r1(99), r2(99);
  EXPECT_EQ(keygen(r1), keygen(r2));
}

TEST(Keys, SelfSignedCertificateVerifiesOnlyUnderItsKey) {
  SeededRng rng(5);
  auto kp = keygen(rng);
  auto other = keygen(rng);
  auto cert = self_sign(kp, "G090LF1172640123");
  EXPECT_TRUE(verify_certificate(cert));
  EXPECT_EQ(cert.subject, "G090LF1172640123");
  auto forged = cert;
  forged.public_key = other.public_key;
  EXPECT_FALSE(verify_certificate(forged));
  EXPECT_EQ(certificate_dearmor(certificate_armor(cert)), cert);
}

TEST(Keys, SignVerifyContracts) {
  SeededRng rng(6);
  auto kp = keygen(rng);
  auto other = keygen(rng);
  Bytes m = to_bytes("serial|token|timestamp");
  auto sig = sign_detached(kp.private_key, m);
  EXPECT_TRUE(verify_detached(kp.public_key, m, sig));
  EXPECT_FALSE(verify_detached(other.public_key, m, sig));
  Bytes flipped = m;
  flipped[3] ^= 0x01;
  EXPECT_FALSE(verify_detached(kp.public_key, flipped, sig));
  EXPECT_FALSE(verify_detached(kp.public_key, m, Bytes(3, 0)));
  EXPECT_FALSE(verify_detached(PublicKey{}, m, sig));
}

TEST(Keys, SignatureNeverVerifiesForRandomOtherMessages) {
  SeededRng rng(7);
  Gen g(70);
  auto kp = keygen(rng);
  Bytes m = g.bytes(48);
  auto sig = sign_detached(kp.private_key, m);
  int false_accepts = 0;
  for (int i = 0; i < 10000; ++i) {
    Bytes other = g.bytes(static_cast<std::size_t>(g.range(0, 96)));
    if (other == m) continue;
    if (verify_detached(kp.public_key, other, sig)) ++false_accepts;
  }
  EXPECT_EQ(false_accepts, 0);
}

TEST(Keys, WrapUnwrap) {
  SeededRng rng(8);
  auto kp = keygen(rng);
  auto other = keygen(rng);
  Bytes key = rng.bytes(32);
  auto wrapped = wrap_key(kp.public_key, key, rng);
  EXPECT_EQ(unwrap_key(kp.private_key, wrapped), key);
  try {
    unwrap_key(other.private_key, wrapped);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::unwrap_failed);
  }
}

// ---------------------------------------------------------------- credentials

WifiCredential home_credential() { return {"HomeNet", WifiCredential::Security::psk, "passphrase-canary-7731"}; }

TEST(Credential, Validation) {
  EXPECT_NO_THROW(home_credential().validate());
  EXPECT_THROW((WifiCredential{"", WifiCredential::Security::open, ""}.validate()), Error);
  EXPECT_THROW((WifiCredential{std::string(33, 'a'), WifiCredential::Security::open, ""}.validate()), Error);
  EXPECT_THROW((WifiCredential{"x", WifiCredential::Security::psk, ""}.validate()), Error);
  EXPECT_THROW((WifiCredential{"x", WifiCredential::Security::psk, std::string(64, 'a')}.validate()), Error);
  EXPECT_NO_THROW((WifiCredential{"x", WifiCredential::Security::psk, std::string(63, 'a')}.validate()));
}

TEST(Credential, EncryptDecryptRoundTripAndFreshness) {
  SeededRng rng(11);
  auto kp = keygen(rng);
  auto cert = self_sign(kp, "SER123");
  auto a = encrypt_credential(home_credential(), cert, rng);
  auto b = encrypt_credential(home_credential(), cert, rng);
  EXPECT_NE(a.iv, b.iv);
  EXPECT_NE(a.ciphertext, b.ciphertext);
  EXPECT_EQ(a.iv.size(), 16u);
  EXPECT_EQ(a.ciphertext.size() % 16, 0u);
  EXPECT_EQ(decrypt_credential(a, kp.private_key), home_credential());
  EXPECT_EQ(EncryptedCredentialBlob::dearmor(a.armor()), a);
  EXPECT_TRUE(a.armor().starts_with("-----BEGIN CMS-----\n"));
  EXPECT_EQ(a.armor().find("passphrase-canary"), std::string::npos);
}

TEST(Credential, WrongKeyAndTruncationFail) {
  SeededRng rng(12);
  auto kp = keygen(rng);
  auto other = keygen(rng);
  auto blob = encrypt_credential(home_credential(), self_sign(kp, "S1"), rng);
  try {
    decrypt_credential(blob, other.private_key);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::unwrap_failed);
    EXPECT_NE(std::string(e.what()).find("unwrap failed"), std::string::npos);
  }
  auto cut = blob;
  cut.ciphertext.resize(cut.ciphertext.size() - 16);
  EXPECT_THROW(decrypt_credential(cut, kp.private_key), Error);
  auto ragged = blob;
  ragged.ciphertext.pop_back();
  EXPECT_THROW(decrypt_credential(ragged, kp.private_key), Error);
}

TEST(Credential, RejectsInvalidCredentialAndCertificate) {
  SeededRng rng(13);
  auto kp = keygen(rng);
  auto cert = self_sign(kp, "S1");
  WifiCredential bad{"x", WifiCredential::Security::psk, ""};
  EXPECT_THROW(encrypt_credential(bad, cert, rng), Error);
  cert.subject = "tampered";
  EXPECT_THROW(encrypt_credential(home_credential(), cert, rng), Error);
}

// ---------------------------------------------------------------- auth token

TEST(AuthToken, RoundTripAndBinding) {
  SeededRng rng(21);
  auto cloud = keygen(rng);
  auto token_a = mint_auth_token(cloud, "alice", "SERIAL-A", 1700000000, rng);
  auto claims = open_auth_token(cloud, token_a);
  EXPECT_EQ(claims, (AuthTokenClaims{"alice", "SERIAL-A", 1700000000}));
  EXPECT_NE(claims.serial, "SERIAL-B");
  auto stranger = keygen(rng);
  EXPECT_THROW(open_auth_token(stranger, token_a), Error);
}

TEST(AuthToken, EveryByteFlipIsRejected) {
  SeededRng rng(22);
  auto cloud = keygen(rng);
  auto token = mint_auth_token(cloud, "alice", "SERIAL-A", 1700000000, rng);
  for (std::size_t i = 0; i < token.size(); ++i) {
    auto t = token;
    t[i] ^= 0x40;
    EXPECT_THROW(open_auth_token(cloud, t), Error) << "byte " << i;
  }
}

// ---------------------------------------------------------------- call token

TEST(CallToken, VerifyContracts) {
  SeededRng rng(31);
  auto acct = keygen(rng);
  NonceCache cache;
  const std::int64_t now = 1700000000;
  auto t = mint_call_token(acct, "sip:a", "sip:b", CallType::intercom, 60, now, rng);
  EXPECT_TRUE(verify_call_token(acct.public_key, t, "sip:a", "sip:b", now, cache));
  EXPECT_FALSE(verify_call_token(acct.public_key, t, "sip:a", "sip:b", now, cache)) << "single use";

  auto t2 = mint_call_token(acct, "sip:a", "sip:b", CallType::regular, 60, now, rng);
  EXPECT_FALSE(verify_call_token(acct.public_key, t2, "sip:a", "sip:c", now, cache));
  EXPECT_FALSE(verify_call_token(acct.public_key, t2, "sip:a", "sip:b", now, cache)) << "monotone false";

  auto t3 = mint_call_token(acct, "sip:a", "sip:b", CallType::regular, 60, now, rng);
  EXPECT_FALSE(verify_call_token(acct.public_key, t3, "sip:a", "sip:b", now + 61, cache));
  auto t4 = mint_call_token(acct, "sip:a", "sip:b", CallType::regular, 60, now, rng);
  EXPECT_TRUE(verify_call_token(acct.public_key, t4, "sip:a", "sip:b", now + 59, cache));

  EXPECT_THROW(mint_call_token(acct, "sip:a", "sip:b", CallType::regular, 0, now, rng), Error);
}

TEST(CallToken, EncodeDecodeAndForgery) {
  SeededRng rng(32);
  auto acct = keygen(rng);
  auto other = keygen(rng);
  auto t = mint_call_token(acct, "sip:a", "sip:b", CallType::regular, 60, 100, rng);
  EXPECT_EQ(CallAuthToken::decode(t.encode()), t);
  NonceCache cache;
  EXPECT_FALSE(verify_call_token(other.public_key, t, "sip:a", "sip:b", 100, cache));
  EXPECT_EQ(cache.size(), 0u) << "forged tokens must not burn nonces";
  auto widened = t;
  widened.ttl = 100000;
  EXPECT_FALSE(verify_call_token(acct.public_key, widened, "sip:a", "sip:b", 100, cache));
}

TEST(CallToken, NoncesAreUniquePerMint) {
  SeededRng rng(33);
  auto acct = keygen(rng);
  std::set<Bytes> nonces;
  for (int i = 0; i < 500; ++i)
    nonces.insert(mint_call_token(acct, "sip:a", "sip:b", CallType::regular, 60, 0, rng).nonce);
  EXPECT_EQ(nonces.size(), 500u);
}

// ---------------------------------------------------------------- sRTP

TEST(Srtp, DerivationIsDeterministicAndSaltSensitive) {
  Bytes key(32, 7), salt(14, 3);
  auto a = srtp_derive(key, salt, 1);
  auto b = srtp_derive(key, salt, 1);
  EXPECT_EQ(a.cipher_key(), b.cipher_key());
  EXPECT_EQ(a.auth_key(), b.auth_key());
  salt[13] ^= 1;
  auto c = srtp_derive(key, salt, 1);
  EXPECT_NE(a.cipher_key(), c.cipher_key());
  EXPECT_NE(a.auth_key(), c.auth_key());
  EXPECT_THROW(srtp_derive(Bytes(16, 0), Bytes(14, 0), 1), Error);
  EXPECT_THROW(srtp_derive(Bytes(32, 0), Bytes(12, 0), 1), Error);
}

TEST(Srtp, CipherAndAuthKeysDifferForRandomMasters) {
  Gen g(41);
  for (int i = 0; i < 1000; ++i) {
    auto ctx = srtp_derive(g.bytes(32), g.bytes(14), 5);
    Bytes auth_prefix(ctx.auth_key().begin(), ctx.auth_key().end());
    Bytes cipher_prefix(ctx.cipher_key().begin(), ctx.cipher_key().begin() + auth_prefix.size());
    EXPECT_NE(cipher_prefix, auth_prefix);
  }
}

TEST(Srtp, ProtectUnprotectReplayAndAuth) {
  Bytes key(32, 1), salt(14, 2);
  auto tx = srtp_derive(key, salt, 0xabcdef01);
  auto rx = srtp_derive(key, salt, 0xabcdef01);
  auto pkt = tx.protect(to_bytes("frame-0"), 160);
  EXPECT_EQ(pkt.size(), kSrtpHeaderLen + 7 + kSrtpTagLen);
  EXPECT_EQ(to_string(rx.unprotect(pkt)), "frame-0");
  try {
    rx.unprotect(pkt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::replay);
  }
  auto pkt2 = tx.protect(to_bytes("frame-1"), 320);
  pkt2.back() ^= 0x01;
  try {
    rx.unprotect(pkt2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::auth_failed);
  }
  pkt2.back() ^= 0x01;
  EXPECT_EQ(to_string(rx.unprotect(pkt2)), "frame-1") << "failed auth must not consume the index";

  auto stranger = srtp_derive(key, salt, 42);
  EXPECT_THROW(stranger.unprotect(tx.protect(to_bytes("x"), 0)), Error);
  EXPECT_THROW(tx.protect({}, 0), Error);
}

TEST(Srtp, OutOfOrderWithinWindowAcceptedOldRejected) {
  Bytes key(32, 4), salt(14, 5);
  auto tx = srtp_derive(key, salt, 9);
  auto rx = srtp_derive(key, salt, 9);
  std::vector<Bytes> pkts;
  for (int i = 0; i < 100; ++i) pkts.push_back(tx.protect(to_bytes("p" + std::to_string(i)), 0));
  EXPECT_EQ(to_string(rx.unprotect(pkts[80])), "p80");
  EXPECT_EQ(to_string(rx.unprotect(pkts[20])), "p20");  // 60 behind: inside window
  EXPECT_THROW(rx.unprotect(pkts[10]), Error);          // 70 behind: outside window
  EXPECT_EQ(to_string(rx.unprotect(pkts[99])), "p99");
}

TEST(Srtp, SequenceRolloverIsTracked) {
  Bytes key(32, 4), salt(14, 5);
  auto tx = srtp_derive(key, salt, 9);
  auto rx = srtp_derive(key, salt, 9);
  tx.set_next_send_index(0xfffe);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(to_string(rx.unprotect(tx.protect(to_bytes("r"), 0))), "r");
  EXPECT_EQ(tx.next_send_index(), 0x10002u);
}

TEST(Srtp, CounterExhaustionIsExplicit) {
  auto tx = srtp_derive(Bytes(32, 0), Bytes(14, 0), 1);
  tx.set_next_send_index(kMaxPacketIndex);
  EXPECT_NO_THROW(tx.protect(to_bytes("last"), 0));
  try {
    tx.protect(to_bytes("wrap"), 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::counter_exhausted);
  }
}

}  // namespace
}  // namespace echotb::crypto
