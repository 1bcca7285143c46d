#include "martsia/crypto/hash.hpp"

#include <openssl/evp.h>

#include <memory>

#include "martsia/error.hpp"

namespace martsia::crypto {

namespace {

struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};

}  // namespace

std::string Digest::hex() const { return hex_encode(bytes); }

Digest Digest::from_hex(std::string_view hex) {
  if (hex.size() != 64) fail(Errc::Malformed, "digest must be 64 hex characters");
  auto raw = hex_decode(hex);
  Digest d;
  std::copy(raw.begin(), raw.end(), d.bytes.begin());
  return d;
}

Digest Digest::from_text(std::string_view text) {
  constexpr std::string_view kPrefix = "h256:";
  if (text.substr(0, kPrefix.size()) != kPrefix) {
    fail(Errc::Malformed, "digest text must start with h256:");
  }
  auto hex = text.substr(kPrefix.size());
  for (char c : hex) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) {
      fail(Errc::Malformed, "digest text must be lowercase hex");
    }
  }
  return from_hex(hex);
}

Digest hash256(std::initializer_list<ByteView> parts) {
  std::unique_ptr<EVP_MD_CTX, MdCtxDeleter> ctx(EVP_MD_CTX_new());
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    fail(Errc::IoError, "sha256 init failed");
  }
  for (auto part : parts) {
    if (EVP_DigestUpdate(ctx.get(), part.data(), part.size()) != 1) {
      fail(Errc::IoError, "sha256 update failed");
    }
  }
  Digest d;
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(ctx.get(), d.bytes.data(), &len) != 1 || len != 32) {
    fail(Errc::IoError, "sha256 final failed");
  }
  return d;
}

Digest hash256(ByteView data) { return hash256({data}); }
Digest hash256(std::string_view data) { return hash256({as_bytes(data)}); }

Commitment commit(ByteView opening) { return {hash256(opening)}; }

bool open(const Commitment& c, ByteView opening) {
  return hash256(opening) == c.digest;
}

}  // namespace martsia::crypto
