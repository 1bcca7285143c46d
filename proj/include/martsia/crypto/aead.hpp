#pragma once

#include <array>
#include <cstdint>

#include "martsia/bytes.hpp"

namespace martsia::crypto {

using SymmetricKey = std::array<std::uint8_t, 32>;
using Nonce = std::array<std::uint8_t, 12>;

inline constexpr std::size_t kAeadTagSize = 16;

/// AES-256-GCM. Output is ciphertext || 16-byte tag.
Bytes aead_encrypt(const SymmetricKey& key, const Nonce& nonce,
                   ByteView plaintext, ByteView associated_data);

/// Throws Error(AuthenticationFailed) if the tag does not verify.
Bytes aead_decrypt(const SymmetricKey& key, const Nonce& nonce,
                   ByteView ciphertext, ByteView associated_data);

}  // namespace martsia::crypto
