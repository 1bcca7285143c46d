#include <gtest/gtest.h>

#include <blst.h>

#include "martsia/crypto/hash.hpp"
#include "martsia/error.hpp"

namespace martsia::crypto {
namespace {

TEST(Sha256, FipsVectors) {
  EXPECT_EQ(hash256(std::string_view("")).hex(),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(hash256(std::string_view("abc")).hex(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(hash256(std::string_view(
                        "abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq"))
                .hex(),
            "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST(Sha256, AgreesWithIndependentImplementation) {
  for (std::size_t len : {0u, 1u, 55u, 56u, 63u, 64u, 65u, 1000u}) {
    Bytes msg(len);
    for (std::size_t i = 0; i < len; ++i) msg[i] = static_cast<std::uint8_t>(i * 31 + 7);
    std::array<std::uint8_t, 32> reference{};
    blst_sha256(reference.data(), msg.data(), msg.size());
    EXPECT_EQ(hash256(msg).bytes, reference) << "length " << len;
  }
}

TEST(Sha256, MultiPartEqualsConcatenation) {
  auto a = as_bytes("martsia/");
  auto b = as_bytes("parts");
  EXPECT_EQ(hash256({a, b}), hash256(std::string_view("martsia/parts")));
}

TEST(Digest, TextForm) {
  auto d = hash256(std::string_view("abc"));
  EXPECT_EQ(d.text(), "h256:" + d.hex());
  EXPECT_EQ(Digest::from_text(d.text()), d);
  EXPECT_THROW(Digest::from_text(d.hex()), Error);
  EXPECT_THROW(Digest::from_text("h256:ABCD"), Error);
  std::string upper = d.text();
  upper[6] = 'A';
  EXPECT_THROW(Digest::from_text(upper), Error);
}

TEST(Commitment, OpensOnlyWithOriginal) {
  Bytes x(32, 0x11);
  auto c = commit(x);
  EXPECT_TRUE(open(c, x));
  x[0] ^= 1;
  EXPECT_FALSE(open(c, x));
}

}  // namespace
}  // namespace martsia::crypto
