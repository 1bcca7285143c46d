#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>

#include "martsia/bytes.hpp"

namespace martsia::crypto {

/// 32-byte SHA-256 digest. Text form is `h256:<64 lowercase hex>`.
struct Digest {
  std::array<std::uint8_t, 32> bytes{};

  auto operator<=>(const Digest&) const = default;

  std::string hex() const;
  std::string text() const { return "h256:" + hex(); }
  static Digest from_hex(std::string_view hex);
  static Digest from_text(std::string_view text);
};

Digest hash256(ByteView data);
Digest hash256(std::string_view data);
/// Hash of the concatenation of `parts`.
Digest hash256(std::initializer_list<ByteView> parts);

/// Hash-only commitment to a uniformly random opening.
struct Commitment {
  Digest digest;
  bool operator==(const Commitment&) const = default;
};

Commitment commit(ByteView opening);
bool open(const Commitment& c, ByteView opening);

}  // namespace martsia::crypto
