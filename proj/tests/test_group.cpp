#include <gtest/gtest.h>

#include "martsia/crypto/group.hpp"
#include "martsia/error.hpp"
#include "martsia/rng.hpp"

namespace martsia::crypto {
namespace {

template <std::size_t N>
std::string hex(const std::array<std::uint8_t, N>& a) {
  return hex_encode(a);
}

TEST(Scalar, FieldArithmetic) {
  SeededRng rng(11);
  auto a = Scalar::random(rng), b = Scalar::random(rng);
  EXPECT_EQ(a * a.inverse(), Scalar::from_u64(1));
  EXPECT_EQ((a + b) - b, a);
  EXPECT_EQ(a + (-a), Scalar());
  EXPECT_TRUE(Scalar().is_zero());
  EXPECT_EQ(Scalar::from_u64(6) * Scalar::from_u64(7), Scalar::from_u64(42));
}

TEST(Scalar, CanonicalEncoding) {
  SeededRng rng(12);
  auto a = Scalar::random(rng);
  EXPECT_EQ(Scalar::from_bytes(a.to_bytes()), a);
  // r itself (little-endian) is not a canonical scalar.
  auto r = hex_decode("01000000fffffffffe5bfeff02a4bd5305d8a10908d83933487d9d2953a7ed73");
  EXPECT_THROW(Scalar::from_bytes(r), Error);
  EXPECT_THROW(Scalar::from_bytes(Bytes(31, 0)), Error);
}

TEST(G1, GeneratorEncodingIsStandard) {
  EXPECT_EQ(hex(G1::generator().compress()),
            "97f1d3a73197d7942695638c4fa9ac0fc3688c4f9774b905a14e3a3f171bac58"
            "6c55e83ff97a1aeffb3af00adb22c6bb");
}

TEST(G2, GeneratorEncodingIsStandard) {
  EXPECT_EQ(hex(G2::generator().compress()),
            "93e02b6052719f607dacd3a088274f65596bd0d09920b61ab5da61bbdc7f5049"
            "334cf11213945d57e5ac7d055d042b7e024aa2b2f08f0a91260805272dc51051"
            "c6e47ad4fa403b02b4510b647ae3d1770bac0326a805bbefd48056c8c121bdb8");
}

TEST(G1, HashToCurveMatchesRfc9380Vector) {
  // BLS12381G1_XMD:SHA-256_SSWU_RO_, msg = "".
  auto p = G1::hash({}, "QUUX-V01-CS02-with-BLS12381G1_XMD:SHA-256_SSWU_RO_");
  EXPECT_EQ(hex(p.compress()),
            "852926add2207b76ca4fa57a8734416c8dc95e24501772c814278700eed6d1e4"
            "e8cf62d9c09db0fac349612b759e79a1");
}

TEST(G1, CompressRoundTripAndValidation) {
  SeededRng rng(13);
  auto p = G1::generator() * Scalar::random(rng);
  EXPECT_EQ(G1::decompress(p.compress()), p);
  EXPECT_TRUE(G1::decompress(G1().compress()).is_identity());

  auto bytes = p.compress();
  bytes[0] &= 0x7f;  // drop the compression flag
  EXPECT_THROW(G1::decompress(bytes), Error);
  EXPECT_THROW(G1::decompress(Bytes(47, 0)), Error);
  std::array<std::uint8_t, 48> junk{};
  junk.fill(0xff);
  EXPECT_THROW(G1::decompress(junk), Error);
}

TEST(G2, CompressRoundTrip) {
  SeededRng rng(14);
  auto q = G2::generator() * Scalar::random(rng);
  EXPECT_EQ(G2::decompress(q.compress()), q);
  EXPECT_EQ(q + (-q), G2());
}

TEST(Pairing, Bilinearity) {
  SeededRng rng(15);
  auto a = Scalar::random(rng), b = Scalar::random(rng);
  auto g1 = G1::generator();
  auto g2 = G2::generator();
  auto base = pairing(g1, g2);
  EXPECT_FALSE(base.is_one());
  EXPECT_EQ(pairing(g1 * a, g2 * b), base.pow(a * b));
  EXPECT_EQ(pairing(g1 * a, g2) * pairing(g1 * b, g2), base.pow(a + b));
  EXPECT_EQ(base.pow(a) * base.pow(a).inverse(), Gt());
  EXPECT_TRUE(pairing(G1(), g2).is_one());
}

TEST(Pairing, MultiPairingEqualsProduct) {
  SeededRng rng(16);
  std::vector<std::pair<G1, G2>> terms;
  Gt expected;
  for (int i = 0; i < 3; ++i) {
    auto p = G1::generator() * Scalar::random(rng);
    auto q = G2::generator() * Scalar::random(rng);
    terms.emplace_back(p, q);
    expected *= pairing(p, q);
  }
  terms.emplace_back(G1(), G2::generator());  // identities contribute nothing
  EXPECT_EQ(multi_pairing(terms), expected);
}

TEST(Gt, SerializationRoundTripAndValidation) {
  SeededRng rng(17);
  auto x = pairing(G1::generator(), G2::generator()).pow(Scalar::random(rng));
  auto bytes = x.to_bytes();
  ASSERT_EQ(bytes.size(), Gt::kSize);
  EXPECT_EQ(Gt::from_bytes(bytes), x);
  EXPECT_EQ(Gt::from_bytes(Gt().to_bytes()), Gt());

  auto bad = bytes;
  bad[100] ^= 1;
  EXPECT_THROW(Gt::from_bytes(bad), Error);
  EXPECT_THROW(Gt::from_bytes(Bytes(Gt::kSize, 0)), Error);
  EXPECT_THROW(Gt::from_bytes(Bytes(10, 1)), Error);
}

}  // namespace
}  // namespace martsia::crypto
