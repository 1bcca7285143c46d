#include <gtest/gtest.h>

#include "martsia/crypto/aead.hpp"
#include "martsia/error.hpp"
#include "martsia/rng.hpp"

namespace martsia::crypto {
namespace {

class AeadTest : public ::testing::Test {
 protected:
  SeededRng rng{7};
  SymmetricKey key = rng.draw<32>();
  Nonce nonce = rng.draw<12>();
  Bytes plaintext = to_bytes("item=wheelchair ramps;quantity=100");
  Bytes ad = to_bytes("22063028/62618638");
};

void expect_auth_failure(const SymmetricKey& k, const Nonce& n, const Bytes& ct, const Bytes& ad) {
  try {
    aead_decrypt(k, n, ct, ad);
    ADD_FAILURE() << "decryption unexpectedly succeeded";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::AuthenticationFailed);
  }
}

TEST_F(AeadTest, RoundTrip) {
  auto ct = aead_encrypt(key, nonce, plaintext, ad);
  EXPECT_EQ(ct.size(), plaintext.size() + kAeadTagSize);
  EXPECT_EQ(aead_decrypt(key, nonce, ct, ad), plaintext);
}

TEST_F(AeadTest, EmptyPlaintext) {
  auto ct = aead_encrypt(key, nonce, {}, ad);
  EXPECT_EQ(ct.size(), kAeadTagSize);
  EXPECT_TRUE(aead_decrypt(key, nonce, ct, ad).empty());
}

TEST_F(AeadTest, EveryCiphertextBitFlipIsDetected) {
  auto ct = aead_encrypt(key, nonce, plaintext, ad);
  for (std::size_t i = 0; i < ct.size() * 8; ++i) {
    auto bad = ct;
    bad[i / 8] ^= static_cast<std::uint8_t>(1u << (i % 8));
    expect_auth_failure(key, nonce, bad, ad);
  }
}

TEST_F(AeadTest, NonceAndAssociatedDataBitFlipsAreDetected) {
  auto ct = aead_encrypt(key, nonce, plaintext, ad);
  for (std::size_t i = 0; i < nonce.size() * 8; ++i) {
    auto bad = nonce;
    bad[i / 8] ^= static_cast<std::uint8_t>(1u << (i % 8));
    expect_auth_failure(key, bad, ct, ad);
  }
  for (std::size_t i = 0; i < ad.size() * 8; ++i) {
    auto bad = ad;
    bad[i / 8] ^= static_cast<std::uint8_t>(1u << (i % 8));
    expect_auth_failure(key, nonce, ct, bad);
  }
}

TEST_F(AeadTest, WrongKeyAndTruncationFail) {
  auto ct = aead_encrypt(key, nonce, plaintext, ad);
  auto other = key;
  other[31] ^= 0x80;
  expect_auth_failure(other, nonce, ct, ad);
  expect_auth_failure(key, nonce, Bytes(ct.begin(), ct.begin() + 10), ad);
}

}  // namespace
}  // namespace martsia::crypto
