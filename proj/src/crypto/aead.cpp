#include "martsia/crypto/aead.hpp"

#include <openssl/evp.h>

#include <memory>

#include "martsia/error.hpp"

namespace martsia::crypto {

namespace {

struct CipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* ctx) const { EVP_CIPHER_CTX_free(ctx); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;

CipherCtx make_ctx(const SymmetricKey& key, const Nonce& nonce, bool encrypt) {
  CipherCtx ctx(EVP_CIPHER_CTX_new());
  if (!ctx) fail(Errc::IoError, "cipher context allocation failed");
  auto init = encrypt ? EVP_EncryptInit_ex : EVP_DecryptInit_ex;
  if (init(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr) != 1 ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN,
                          static_cast<int>(nonce.size()), nullptr) != 1 ||
      init(ctx.get(), nullptr, nullptr, key.data(), nonce.data()) != 1) {
    fail(Errc::IoError, "aes-gcm init failed");
  }
  return ctx;
}

}  // namespace

Bytes aead_encrypt(const SymmetricKey& key, const Nonce& nonce,
                   ByteView plaintext, ByteView associated_data) {
  auto ctx = make_ctx(key, nonce, true);
  int len = 0;
  if (!associated_data.empty() &&
      EVP_EncryptUpdate(ctx.get(), nullptr, &len, associated_data.data(),
                        static_cast<int>(associated_data.size())) != 1) {
    fail(Errc::IoError, "aes-gcm aad failed");
  }
  Bytes out(plaintext.size() + kAeadTagSize);
  int written = 0;
  if (!plaintext.empty()) {
    if (EVP_EncryptUpdate(ctx.get(), out.data(), &len, plaintext.data(),
                          static_cast<int>(plaintext.size())) != 1) {
      fail(Errc::IoError, "aes-gcm encrypt failed");
    }
    written = len;
  }
  if (EVP_EncryptFinal_ex(ctx.get(), out.data() + written, &len) != 1) {
    fail(Errc::IoError, "aes-gcm final failed");
  }
  written += len;
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kAeadTagSize,
                          out.data() + written) != 1) {
    fail(Errc::IoError, "aes-gcm tag failed");
  }
  out.resize(static_cast<std::size_t>(written) + kAeadTagSize);
  return out;
}

Bytes aead_decrypt(const SymmetricKey& key, const Nonce& nonce,
                   ByteView ciphertext, ByteView associated_data) {
  if (ciphertext.size() < kAeadTagSize) {
    fail(Errc::AuthenticationFailed, "ciphertext shorter than tag");
  }
  auto body = ciphertext.first(ciphertext.size() - kAeadTagSize);
  auto tag = ciphertext.last(kAeadTagSize);
  auto ctx = make_ctx(key, nonce, false);
  int len = 0;
  if (!associated_data.empty() &&
      EVP_DecryptUpdate(ctx.get(), nullptr, &len, associated_data.data(),
                        static_cast<int>(associated_data.size())) != 1) {
    fail(Errc::IoError, "aes-gcm aad failed");
  }
  Bytes out(body.size());
  int written = 0;
  if (!body.empty()) {
    if (EVP_DecryptUpdate(ctx.get(), out.data(), &len, body.data(),
                          static_cast<int>(body.size())) != 1) {
      fail(Errc::IoError, "aes-gcm decrypt failed");
    }
    written = len;
  }
  Bytes tag_copy(tag.begin(), tag.end());
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kAeadTagSize,
                          tag_copy.data()) != 1) {
    fail(Errc::IoError, "aes-gcm set tag failed");
  }
  if (EVP_DecryptFinal_ex(ctx.get(), out.data() + written, &len) != 1) {
    fail(Errc::AuthenticationFailed, "AEAD tag mismatch");
  }
  out.resize(static_cast<std::size_t>(written + len));
  return out;
}

}  // namespace martsia::crypto
