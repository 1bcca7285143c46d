#pragma once

// Thin value types over the BLS12-381 pairing groups (blst). G1 and G2 are
// the source groups, Gt the target group, Scalar the prime field Z_r.

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>

#include <blst.h>

#include "martsia/bytes.hpp"
#include "martsia/rng.hpp"

namespace martsia::crypto {

inline constexpr std::string_view kGroupId = "bls12-381";

class Scalar {
 public:
  Scalar();  // zero
  static Scalar from_u64(std::uint64_t v);
  /// Uniform element drawn from 64 bytes of rng output reduced mod r.
  static Scalar random(Rng& rng);
  /// Canonical 32-byte little-endian encoding; rejects values >= r.
  static Scalar from_bytes(ByteView le32);
  static Scalar from_wide_bytes(ByteView be);  // reduces mod r

  Scalar operator+(const Scalar& o) const;
  Scalar operator-(const Scalar& o) const;
  Scalar operator*(const Scalar& o) const;
  Scalar operator-() const;
  Scalar& operator+=(const Scalar& o) { return *this = *this + o; }
  Scalar& operator*=(const Scalar& o) { return *this = *this * o; }
  /// Multiplicative inverse; the inverse of zero is zero.
  Scalar inverse() const;

  bool is_zero() const;
  bool operator==(const Scalar& o) const;

  std::array<std::uint8_t, 32> to_bytes() const;  // little-endian
  blst_scalar to_blst() const;

 private:
  blst_fr v_;
};

class G1 {
 public:
  static constexpr std::size_t kCompressedSize = 48;

  G1();  // identity
  static G1 generator();
  static G1 hash(ByteView msg, std::string_view dst);
  static G1 decompress(ByteView bytes);  // validates subgroup membership

  G1 operator+(const G1& o) const;
  G1 operator*(const Scalar& s) const;
  G1 operator-() const;
  bool operator==(const G1& o) const;
  bool is_identity() const;

  std::array<std::uint8_t, kCompressedSize> compress() const;
  blst_p1_affine affine() const;

 private:
  blst_p1 p_;
};

class G2 {
 public:
  static constexpr std::size_t kCompressedSize = 96;

  G2();
  static G2 generator();
  static G2 hash(ByteView msg, std::string_view dst);
  static G2 decompress(ByteView bytes);

  G2 operator+(const G2& o) const;
  G2 operator*(const Scalar& s) const;
  G2 operator-() const;
  bool operator==(const G2& o) const;
  bool is_identity() const;

  std::array<std::uint8_t, kCompressedSize> compress() const;
  blst_p2_affine affine() const;

 private:
  blst_p2 p_;
};

class Gt {
 public:
  static constexpr std::size_t kSize = 48 * 12;

  Gt();  // one
  static Gt from_bytes(ByteView bytes);  // validates canonical + subgroup

  Gt operator*(const Gt& o) const;
  Gt& operator*=(const Gt& o) { return *this = *this * o; }
  Gt pow(const Scalar& e) const;
  Gt inverse() const;
  bool operator==(const Gt& o) const;
  bool is_one() const;

  Bytes to_bytes() const;

 private:
  explicit Gt(const blst_fp12& v) : v_(v) {}
  blst_fp12 v_;
  friend Gt pairing(const G1&, const G2&);
  friend Gt multi_pairing(std::span<const std::pair<G1, G2>>);
};

Gt pairing(const G1& p, const G2& q);
/// Product of pairings with a single final exponentiation.
Gt multi_pairing(std::span<const std::pair<G1, G2>> terms);

}  // namespace martsia::crypto
