#include "martsia/crypto/group.hpp"

#include <algorithm>
#include <cstring>

#include "martsia/error.hpp"

namespace martsia::crypto {

// ---- Scalar ---------------------------------------------------------------

Scalar::Scalar() { std::memset(&v_, 0, sizeof(v_)); }

Scalar Scalar::from_u64(std::uint64_t v) {
  const std::uint64_t limbs[4] = {v, 0, 0, 0};
  Scalar s;
  blst_fr_from_uint64(&s.v_, limbs);
  return s;
}

Scalar Scalar::random(Rng& rng) {
  auto wide = rng.draw<64>();
  return from_wide_bytes(wide);
}

Scalar Scalar::from_wide_bytes(ByteView be) {
  blst_scalar raw;
  blst_scalar_from_be_bytes(&raw, be.data(), be.size());
  Scalar s;
  blst_fr_from_scalar(&s.v_, &raw);
  return s;
}

Scalar Scalar::from_bytes(ByteView le32) {
  if (le32.size() != 32) fail(Errc::Malformed, "scalar must be 32 bytes");
  blst_scalar raw;
  blst_scalar_from_lendian(&raw, le32.data());
  if (!blst_scalar_fr_check(&raw) && !std::all_of(le32.begin(), le32.end(),
                                                  [](auto b) { return b == 0; })) {
    fail(Errc::Malformed, "scalar not reduced");
  }
  Scalar s;
  blst_fr_from_scalar(&s.v_, &raw);
  return s;
}

Scalar Scalar::operator+(const Scalar& o) const {
  Scalar r;
  blst_fr_add(&r.v_, &v_, &o.v_);
  return r;
}

Scalar Scalar::operator-(const Scalar& o) const {
  Scalar r;
  blst_fr_sub(&r.v_, &v_, &o.v_);
  return r;
}

Scalar Scalar::operator*(const Scalar& o) const {
  Scalar r;
  blst_fr_mul(&r.v_, &v_, &o.v_);
  return r;
}

Scalar Scalar::operator-() const {
  Scalar r;
  blst_fr_cneg(&r.v_, &v_, true);
  return r;
}

Scalar Scalar::inverse() const {
  if (is_zero()) return {};
  Scalar r;
  blst_fr_eucl_inverse(&r.v_, &v_);
  return r;
}

bool Scalar::is_zero() const {
  auto b = to_bytes();
  return std::all_of(b.begin(), b.end(), [](auto x) { return x == 0; });
}

bool Scalar::operator==(const Scalar& o) const { return to_bytes() == o.to_bytes(); }

blst_scalar Scalar::to_blst() const {
  blst_scalar raw;
  blst_scalar_from_fr(&raw, &v_);
  return raw;
}

std::array<std::uint8_t, 32> Scalar::to_bytes() const {
  auto raw = to_blst();
  std::array<std::uint8_t, 32> out{};
  blst_lendian_from_scalar(out.data(), &raw);
  return out;
}

// ---- G1 -------------------------------------------------------------------

G1::G1() { std::memset(&p_, 0, sizeof(p_)); }

G1 G1::generator() {
  G1 g;
  g.p_ = *blst_p1_generator();
  return g;
}

G1 G1::hash(ByteView msg, std::string_view dst) {
  G1 g;
  blst_hash_to_g1(&g.p_, msg.data(), msg.size(),
                  reinterpret_cast<const byte*>(dst.data()), dst.size(), nullptr, 0);
  return g;
}

G1 G1::decompress(ByteView bytes) {
  if (bytes.size() != kCompressedSize) fail(Errc::Malformed, "G1 encoding must be 48 bytes");
  blst_p1_affine aff;
  if (blst_p1_uncompress(&aff, bytes.data()) != BLST_SUCCESS ||
      !blst_p1_affine_in_g1(&aff)) {
    fail(Errc::Malformed, "invalid G1 element");
  }
  G1 g;
  blst_p1_from_affine(&g.p_, &aff);
  auto canon = g.compress();
  if (!std::equal(bytes.begin(), bytes.end(), canon.begin())) {
    fail(Errc::Malformed, "non-canonical G1 encoding");
  }
  return g;
}

G1 G1::operator+(const G1& o) const {
  G1 r;
  blst_p1_add_or_double(&r.p_, &p_, &o.p_);
  return r;
}

G1 G1::operator*(const Scalar& s) const {
  auto raw = s.to_blst();
  G1 r;
  blst_p1_mult(&r.p_, &p_, raw.b, 255);
  return r;
}

G1 G1::operator-() const {
  G1 r = *this;
  blst_p1_cneg(&r.p_, true);
  return r;
}

bool G1::operator==(const G1& o) const { return blst_p1_is_equal(&p_, &o.p_); }
bool G1::is_identity() const { return blst_p1_is_inf(&p_); }

std::array<std::uint8_t, G1::kCompressedSize> G1::compress() const {
  std::array<std::uint8_t, kCompressedSize> out{};
  blst_p1_compress(out.data(), &p_);
  return out;
}

blst_p1_affine G1::affine() const {
  blst_p1_affine aff;
  blst_p1_to_affine(&aff, &p_);
  return aff;
}

// ---- G2 -------------------------------------------------------------------

G2::G2() { std::memset(&p_, 0, sizeof(p_)); }

G2 G2::generator() {
  G2 g;
  g.p_ = *blst_p2_generator();
  return g;
}

G2 G2::hash(ByteView msg, std::string_view dst) {
  G2 g;
  blst_hash_to_g2(&g.p_, msg.data(), msg.size(),
                  reinterpret_cast<const byte*>(dst.data()), dst.size(), nullptr, 0);
  return g;
}

G2 G2::decompress(ByteView bytes) {
  if (bytes.size() != kCompressedSize) fail(Errc::Malformed, "G2 encoding must be 96 bytes");
  blst_p2_affine aff;
  if (blst_p2_uncompress(&aff, bytes.data()) != BLST_SUCCESS ||
      !blst_p2_affine_in_g2(&aff)) {
    fail(Errc::Malformed, "invalid G2 element");
  }
  G2 g;
  blst_p2_from_affine(&g.p_, &aff);
  auto canon = g.compress();
  if (!std::equal(bytes.begin(), bytes.end(), canon.begin())) {
    fail(Errc::Malformed, "non-canonical G2 encoding");
  }
  return g;
}

G2 G2::operator+(const G2& o) const {
  G2 r;
  blst_p2_add_or_double(&r.p_, &p_, &o.p_);
  return r;
}

G2 G2::operator*(const Scalar& s) const {
  auto raw = s.to_blst();
  G2 r;
  blst_p2_mult(&r.p_, &p_, raw.b, 255);
  return r;
}

G2 G2::operator-() const {
  G2 r = *this;
  blst_p2_cneg(&r.p_, true);
  return r;
}

bool G2::operator==(const G2& o) const { return blst_p2_is_equal(&p_, &o.p_); }
bool G2::is_identity() const { return blst_p2_is_inf(&p_); }

std::array<std::uint8_t, G2::kCompressedSize> G2::compress() const {
  std::array<std::uint8_t, kCompressedSize> out{};
  blst_p2_compress(out.data(), &p_);
  return out;
}

blst_p2_affine G2::affine() const {
  blst_p2_affine aff;
  blst_p2_to_affine(&aff, &p_);
  return aff;
}

// ---- Gt -------------------------------------------------------------------

Gt::Gt() : v_(*blst_fp12_one()) {}

Gt Gt::operator*(const Gt& o) const {
  blst_fp12 r;
  blst_fp12_mul(&r, &v_, &o.v_);
  return Gt(r);
}

Gt Gt::pow(const Scalar& e) const {
  auto bits = e.to_bytes();
  blst_fp12 acc = *blst_fp12_one();
  bool started = false;
  for (int i = 255; i >= 0; --i) {
    if (started) blst_fp12_sqr(&acc, &acc);
    if ((bits[static_cast<std::size_t>(i / 8)] >> (i % 8)) & 1) {
      blst_fp12_mul(&acc, &acc, &v_);
      started = true;
    }
  }
  return Gt(acc);
}

Gt Gt::inverse() const {
  blst_fp12 r;
  blst_fp12_inverse(&r, &v_);
  return Gt(r);
}

bool Gt::operator==(const Gt& o) const { return blst_fp12_is_equal(&v_, &o.v_); }
bool Gt::is_one() const { return blst_fp12_is_one(&v_); }

Bytes Gt::to_bytes() const {
  Bytes out(kSize);
  blst_bendian_from_fp12(out.data(), &v_);
  return out;
}

Gt Gt::from_bytes(ByteView bytes) {
  if (bytes.size() != kSize) fail(Errc::Malformed, "Gt encoding must be 576 bytes");
  blst_fp12 v;
  const std::uint8_t* p = bytes.data();
  // Mirrors blst_bendian_from_fp12: fp2 index outer, fp6 index inner.
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      blst_fp_from_bendian(&v.fp6[j].fp2[i].fp[0], p);
      p += 48;
      blst_fp_from_bendian(&v.fp6[j].fp2[i].fp[1], p);
      p += 48;
    }
  }
  Gt g(v);
  auto canon = g.to_bytes();
  if (!std::equal(bytes.begin(), bytes.end(), canon.begin())) {
    fail(Errc::Malformed, "non-canonical Gt encoding");
  }
  if (!blst_fp12_in_group(&v)) fail(Errc::Malformed, "Gt element outside subgroup");
  return g;
}

Gt pairing(const G1& p, const G2& q) {
  if (p.is_identity() || q.is_identity()) return Gt();
  auto pa = p.affine();
  auto qa = q.affine();
  blst_fp12 ml;
  blst_miller_loop(&ml, &qa, &pa);
  blst_fp12 out;
  blst_final_exp(&out, &ml);
  return Gt(out);
}

Gt multi_pairing(std::span<const std::pair<G1, G2>> terms) {
  blst_fp12 acc = *blst_fp12_one();
  for (const auto& [p, q] : terms) {
    if (p.is_identity() || q.is_identity()) continue;
    auto pa = p.affine();
    auto qa = q.affine();
    blst_fp12 ml;
    blst_miller_loop(&ml, &qa, &pa);
    blst_fp12_mul(&acc, &acc, &ml);
  }
  blst_fp12 out;
  blst_final_exp(&out, &acc);
  return Gt(out);
}

}  // namespace martsia::crypto
