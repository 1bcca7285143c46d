#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>

#include "martsia/bytes.hpp"

typedef struct evp_pkey_st EVP_PKEY;

namespace martsia::crypto {

inline constexpr int kDefaultRsaBits = 3072;

using Challenge = std::array<std::uint8_t, 32>;

/// RSA public key used to verify RSA-PSS/SHA-256 signatures.
class VerifyKey {
 public:
  static VerifyKey from_der(ByteView der);
  static VerifyKey from_pem(const std::string& pem);

  Bytes der() const;
  std::string pem() const;
  bool verify(ByteView message, ByteView signature) const;

  bool operator==(const VerifyKey& other) const { return der() == other.der(); }

 private:
  explicit VerifyKey(std::shared_ptr<EVP_PKEY> key) : key_(std::move(key)) {}
  std::shared_ptr<EVP_PKEY> key_;
  friend class SigningKey;
};

class SigningKey {
 public:
  static SigningKey generate(int bits = kDefaultRsaBits);
  static SigningKey from_pem(const std::string& pem);

  std::string pem() const;
  VerifyKey verify_key() const;
  Bytes sign(ByteView message) const;

 private:
  explicit SigningKey(std::shared_ptr<EVP_PKEY> key) : key_(std::move(key)) {}
  std::shared_ptr<EVP_PKEY> key_;
};

Bytes sign_challenge(const SigningKey& key, const Challenge& challenge);
bool verify_challenge(const VerifyKey& key, const Challenge& challenge,
                      ByteView signature);

}  // namespace martsia::crypto
