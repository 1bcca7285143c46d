#include "martsia/crypto/signature.hpp"

#include <openssl/evp.h>
#include <openssl/pem.h>
#include <openssl/rsa.h>
#include <openssl/x509.h>

#include "martsia/error.hpp"

namespace martsia::crypto {

namespace {

std::shared_ptr<EVP_PKEY> own(EVP_PKEY* key) {
  if (key == nullptr) fail(Errc::MalformedKey, "invalid key material");
  return {key, EVP_PKEY_free};
}

struct BioDeleter {
  void operator()(BIO* b) const { BIO_free(b); }
};
using Bio = std::unique_ptr<BIO, BioDeleter>;

std::string drain(BIO* bio) {
  char* data = nullptr;
  long n = BIO_get_mem_data(bio, &data);
  return {data, static_cast<std::size_t>(n)};
}

struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};
using MdCtx = std::unique_ptr<EVP_MD_CTX, MdCtxDeleter>;

bool configure_pss(EVP_PKEY_CTX* pctx) {
  return EVP_PKEY_CTX_set_rsa_padding(pctx, RSA_PKCS1_PSS_PADDING) > 0 &&
         EVP_PKEY_CTX_set_rsa_pss_saltlen(pctx, RSA_PSS_SALTLEN_DIGEST) > 0;
}

constexpr std::string_view kChallengeContext = "martsia/key-request-challenge";

Bytes challenge_message(const Challenge& challenge) {
  ByteWriter w;
  w.str(kChallengeContext).raw(challenge);
  return std::move(w).take();
}

}  // namespace

VerifyKey VerifyKey::from_der(ByteView der) {
  const unsigned char* p = der.data();
  auto key = own(d2i_PUBKEY(nullptr, &p, static_cast<long>(der.size())));
  if (p != der.data() + der.size()) fail(Errc::MalformedKey, "trailing key bytes");
  if (EVP_PKEY_base_id(key.get()) != EVP_PKEY_RSA) {
    fail(Errc::MalformedKey, "verify key is not RSA");
  }
  return VerifyKey(std::move(key));
}

VerifyKey VerifyKey::from_pem(const std::string& pem) {
  Bio bio(BIO_new_mem_buf(pem.data(), static_cast<int>(pem.size())));
  auto key = own(PEM_read_bio_PUBKEY(bio.get(), nullptr, nullptr, nullptr));
  return VerifyKey(std::move(key));
}

Bytes VerifyKey::der() const {
  unsigned char* out = nullptr;
  int n = i2d_PUBKEY(key_.get(), &out);
  if (n <= 0) fail(Errc::MalformedKey, "cannot encode verify key");
  Bytes der(out, out + n);
  OPENSSL_free(out);
  return der;
}

std::string VerifyKey::pem() const {
  Bio bio(BIO_new(BIO_s_mem()));
  if (PEM_write_bio_PUBKEY(bio.get(), key_.get()) != 1) {
    fail(Errc::MalformedKey, "cannot encode verify key");
  }
  return drain(bio.get());
}

bool VerifyKey::verify(ByteView message, ByteView signature) const {
  MdCtx ctx(EVP_MD_CTX_new());
  EVP_PKEY_CTX* pctx = nullptr;
  if (!ctx ||
      EVP_DigestVerifyInit(ctx.get(), &pctx, EVP_sha256(), nullptr, key_.get()) != 1 ||
      !configure_pss(pctx)) {
    return false;
  }
  return EVP_DigestVerify(ctx.get(), signature.data(), signature.size(),
                          message.data(), message.size()) == 1;
}

SigningKey SigningKey::generate(int bits) {
  std::unique_ptr<EVP_PKEY_CTX, decltype(&EVP_PKEY_CTX_free)> ctx(
      EVP_PKEY_CTX_new_id(EVP_PKEY_RSA, nullptr), EVP_PKEY_CTX_free);
  EVP_PKEY* key = nullptr;
  if (!ctx || EVP_PKEY_keygen_init(ctx.get()) != 1 ||
      EVP_PKEY_CTX_set_rsa_keygen_bits(ctx.get(), bits) != 1 ||
      EVP_PKEY_keygen(ctx.get(), &key) != 1) {
    fail(Errc::IoError, "RSA key generation failed");
  }
  return SigningKey(own(key));
}

SigningKey SigningKey::from_pem(const std::string& pem) {
  Bio bio(BIO_new_mem_buf(pem.data(), static_cast<int>(pem.size())));
  auto key = own(PEM_read_bio_PrivateKey(bio.get(), nullptr, nullptr, nullptr));
  if (EVP_PKEY_base_id(key.get()) != EVP_PKEY_RSA) {
    fail(Errc::MalformedKey, "signing key is not RSA");
  }
  return SigningKey(std::move(key));
}

std::string SigningKey::pem() const {
  Bio bio(BIO_new(BIO_s_mem()));
  if (PEM_write_bio_PrivateKey(bio.get(), key_.get(), nullptr, nullptr, 0, nullptr,
                               nullptr) != 1) {
    fail(Errc::MalformedKey, "cannot encode signing key");
  }
  return drain(bio.get());
}

VerifyKey SigningKey::verify_key() const {
  unsigned char* out = nullptr;
  int n = i2d_PUBKEY(key_.get(), &out);
  if (n <= 0) fail(Errc::MalformedKey, "cannot derive verify key");
  Bytes der(out, out + n);
  OPENSSL_free(out);
  return VerifyKey::from_der(der);
}

Bytes SigningKey::sign(ByteView message) const {
  MdCtx ctx(EVP_MD_CTX_new());
  EVP_PKEY_CTX* pctx = nullptr;
  if (!ctx ||
      EVP_DigestSignInit(ctx.get(), &pctx, EVP_sha256(), nullptr, key_.get()) != 1 ||
      !configure_pss(pctx)) {
    fail(Errc::MalformedKey, "signing context setup failed");
  }
  std::size_t len = 0;
  if (EVP_DigestSign(ctx.get(), nullptr, &len, message.data(), message.size()) != 1) {
    fail(Errc::MalformedKey, "signing failed");
  }
  Bytes sig(len);
  if (EVP_DigestSign(ctx.get(), sig.data(), &len, message.data(), message.size()) != 1) {
    fail(Errc::MalformedKey, "signing failed");
  }
  sig.resize(len);
  return sig;
}

Bytes sign_challenge(const SigningKey& key, const Challenge& challenge) {
  return key.sign(challenge_message(challenge));
}

bool verify_challenge(const VerifyKey& key, const Challenge& challenge,
                      ByteView signature) {
  return key.verify(challenge_message(challenge), signature);
}

}  // namespace martsia::crypto
