#include <gtest/gtest.h>

#include "martsia/crypto/abe.hpp"
#include "martsia/crypto/abe_kernels.hpp"
#include "martsia/error.hpp"
#include "martsia/policy/lsss.hpp"
#include "support.hpp"

namespace martsia::crypto {
namespace {

using martsia::testing::params;

const auto& four() {
  static const auto set = martsia::testing::make_authorities(4);
  return set;
}

SymmetricKey key_from(Rng& rng) { return rng.draw<32>(); }

Errc decrypt_error(const AbeCiphertext& ct, const FullDecryptionKey& fdk) {
  try {
    abe_decrypt(params(), ct, fdk);
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::InvalidArgument;  // sentinel: decryption succeeded
}

TEST(GlobalSetup, DeterministicAndSeedSensitive) {
  Seed zero{};
  auto a = global_setup(zero).serialize();
  EXPECT_EQ(a, global_setup(zero).serialize());
  auto flipped = zero;
  flipped[31] ^= 1;
  EXPECT_NE(global_setup(zero).params_digest, global_setup(flipped).params_digest);
}

TEST(GlobalSetup, SerializationRoundTripAndDigestCheck) {
  auto bytes = params().serialize();
  EXPECT_EQ(PublicParameters::deserialize(bytes), params());
  auto bad = bytes;
  bad.back() ^= 1;
  EXPECT_THROW(PublicParameters::deserialize(bad), Error);
  EXPECT_EQ(params().group.group_id, "bls12-381");
}

TEST(AuthSetup, ReproducibleAndConsistent) {
  SeededRng r1(3), r2(3), r3(4);
  auto a = auth_setup(params(), "Auth1", r1);
  auto b = auth_setup(params(), "Auth1", r2);
  auto c = auth_setup(params(), "Auth1", r3);
  EXPECT_EQ(a.serialize(), b.serialize());
  EXPECT_NE(a.public_key, c.public_key);
  EXPECT_TRUE(keypair_consistent(params(), a));
  EXPECT_EQ(AuthorityKeypair::deserialize(a.serialize()).serialize(), a.serialize());
  EXPECT_EQ(AuthorityPublicKey::deserialize(a.public_key.serialize()), a.public_key);
}

TEST(AuthSetup, PerturbedPublicKeyFailsConsistency) {
  SeededRng rng(5);
  auto kp = auth_setup(params(), "Auth1", rng);
  auto bytes = kp.public_key.serialize();
  bytes.back() ^= 1;  // inside the compressed g2^y
  try {
    kp.public_key = AuthorityPublicKey::deserialize(bytes);
    EXPECT_FALSE(keypair_consistent(params(), kp));
  } catch (const Error&) {
    SUCCEED() << "perturbed encoding no longer decodes";
  }
  auto kp2 = auth_setup(params(), "Auth1", rng);
  kp2.public_key.g2_y = kp2.public_key.g2_y + params().g2;
  EXPECT_FALSE(keypair_consistent(params(), kp2));
  auto kp3 = auth_setup(params(), "Auth1", rng);
  kp3.public_key.egg_alpha = kp3.public_key.egg_alpha * params().egg;
  EXPECT_FALSE(keypair_consistent(params(), kp3));
}

TEST(Keygen, SharesVerifyAndBindGid) {
  SeededRng rng(6);
  const auto& auth2 = four().keypair("Auth2");
  auto s1 = keygen(params(), auth2, "0xB0A1c5e4d3f2a1b0c9d8e7f6a5b4c3d2e1f01AA1", "Supplier@Auth2", rng);
  auto s2 = keygen(params(), auth2, "0xB0A1c5e4d3f2a1b0c9d8e7f6a5b4c3d2e1f01AA1", "Supplier@Auth2", rng);
  EXPECT_NE(s1.k, s2.k);
  EXPECT_TRUE(verify_share(params(), auth2.public_key, s1));
  EXPECT_TRUE(verify_share(params(), auth2.public_key, s2));
  EXPECT_EQ(KeyShare::deserialize(s1.serialize()), s1);

  auto moved = s1;
  moved.gid = "0x9E00000000000000000000000000000000C885";
  EXPECT_FALSE(verify_share(params(), auth2.public_key, moved));
  EXPECT_FALSE(verify_share(params(), four().keypair("Auth1").public_key, s1));
}

TEST(Keygen, NamespaceMismatch) {
  SeededRng rng(7);
  for (auto attr : {"Supplier@Auth2", "Supplier", "@Auth1", "Sup plier@Auth1"}) {
    try {
      keygen(params(), four().keypair("Auth1"), "0x1", attr, rng);
      FAIL() << attr;
    } catch (const Error& e) {
      EXPECT_TRUE(e.code() == Errc::NamespaceMismatch || e.code() == Errc::Malformed) << attr;
    }
  }
}

TEST(MergeShares, SameGidDedupAndMismatch) {
  SeededRng rng(8);
  const auto& a1 = four().keypair("Auth1");
  const auto& a2 = four().keypair("Auth2");
  std::vector<KeyShare> shares = {
      keygen(params(), a1, "0xA", "Manufacturer@Auth1", rng),
      keygen(params(), a1, "0xA", "43175279@Auth1", rng),
      keygen(params(), a2, "0xA", "43175279@Auth2", rng),
  };
  auto fdk = merge_shares(shares);
  EXPECT_EQ(fdk.gid, "0xA");
  EXPECT_EQ(fdk.shares.size(), 3u);

  shares.push_back(shares.front());
  shares.push_back(keygen(params(), a1, "0xA", "Manufacturer@Auth1", rng));
  EXPECT_EQ(merge_shares(shares).shares.size(), 3u);
  EXPECT_EQ(merge_shares(shares).shares.at("Manufacturer@Auth1"), shares.front());

  shares.push_back(keygen(params(), a2, "0xB", "Manufacturer@Auth2", rng));
  try {
    merge_shares(shares);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::GidMismatch);
  }
  EXPECT_THROW(merge_shares({}), Error);

  EXPECT_EQ(FullDecryptionKey::deserialize(fdk.serialize()).shares, fdk.shares);
}

TEST(Abe, RoundTripAndNonSatisfaction) {
  SeededRng rng(9);
  auto value = key_from(rng);
  auto ct = abe_encrypt(params(), four().public_keys, policy::parse_policy("Manufacturer@Auth1"),
                        value, rng);
  policy::AttestationSet manufacturer, carrier;
  manufacturer.add("Manufacturer", "Auth1");
  carrier.add("Carrier", "Auth1");
  auto good = martsia::testing::issue_fdk(four(), "0x82", manufacturer, rng);
  auto bad = martsia::testing::issue_fdk(four(), "0x82", carrier, rng);
  EXPECT_EQ(abe_decrypt(params(), ct, good), value);
  EXPECT_EQ(decrypt_error(ct, bad), Errc::PolicyNotSatisfied);
  try {
    abe_decrypt(params(), ct, bad);
  } catch (const Error& e) {
    EXPECT_EQ(e.detail(), "Manufacturer@Auth1");
  }
}

TEST(Abe, MissingAuthorityKey) {
  SeededRng rng(10);
  try {
    abe_encrypt(params(), four().public_keys, policy::parse_policy("x@Auth9 or y@1+"),
                key_from(rng), rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MissingAuthorityKey);
    EXPECT_EQ(e.detail(), "Auth9");
  }
  EXPECT_THROW(abe_encrypt(params(), four().public_keys, policy::parse_policy("y@5+"),
                           key_from(rng), rng),
               Error);
}

TEST(Abe, ThresholdNeedsDistinctAuthorities) {
  SeededRng rng(11);
  auto value = key_from(rng);
  auto ct = abe_encrypt(params(), four().public_keys, policy::parse_policy("43175279@2+"), value, rng);
  policy::AttestationSet one, two;
  one.add("43175279", "Auth3");
  two.add("43175279", "Auth3");
  two.add("43175279", "Auth1");
  EXPECT_EQ(decrypt_error(ct, martsia::testing::issue_fdk(four(), "0xR", one, rng)),
            Errc::PolicyNotSatisfied);
  EXPECT_EQ(abe_decrypt(params(), ct, martsia::testing::issue_fdk(four(), "0xR", two, rng)), value);
}

TEST(Abe, HandSplicedMixedGidKeyFails) {
  SeededRng rng(12);
  auto ct = abe_encrypt(params(), four().public_keys,
                        policy::parse_policy("a@Auth1 and b@Auth2"), key_from(rng), rng);
  policy::AttestationSet a, b;
  a.add("a", "Auth1");
  b.add("b", "Auth2");
  auto fa = martsia::testing::issue_fdk(four(), "0xAlice", a, rng);
  auto fb = martsia::testing::issue_fdk(four(), "0xBob", b, rng);
  EXPECT_EQ(decrypt_error(ct, fa), Errc::PolicyNotSatisfied);
  EXPECT_EQ(decrypt_error(ct, fb), Errc::PolicyNotSatisfied);
  auto spliced = fa;
  spliced.shares.insert(fb.shares.begin(), fb.shares.end());
  EXPECT_EQ(decrypt_error(ct, spliced), Errc::DecryptionFailed);
  spliced.gid = "0xBob";
  EXPECT_EQ(decrypt_error(ct, spliced), Errc::DecryptionFailed);
}

TEST(Abe, CiphertextSerialization) {
  SeededRng rng(13);
  auto ct = abe_encrypt(params(), four().public_keys,
                        policy::parse_policy("Customs@3+ or (43175279@2+ and Manufacturer@Auth1)"),
                        key_from(rng), rng);
  auto bytes = ct.serialize();
  EXPECT_EQ(AbeCiphertext::deserialize(bytes), ct);

  for (std::size_t cut : {std::size_t{0}, std::size_t{5}, bytes.size() / 2, bytes.size() - 1}) {
    try {
      AbeCiphertext::deserialize(ByteView(bytes).first(cut));
      FAIL() << cut;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::MalformedCiphertext);
    }
  }

  // Lowering a threshold keeps the row labels, so it parses; the downgrade
  // only shows up as a wrong blinding element for an under-qualified reader.
  auto relabeled = ct;
  relabeled.policy_text = "Customs@2+ or (43175279@2+ and Manufacturer@Auth1)";
  policy::AttestationSet two_customs;
  two_customs.add("Customs", "Auth1");
  two_customs.add("Customs", "Auth2");
  EXPECT_EQ(decrypt_error(AbeCiphertext::deserialize(relabeled.serialize()),
                          martsia::testing::issue_fdk(four(), "0xC", two_customs, rng)),
            Errc::DecryptionFailed);
  auto renamed = ct;
  renamed.policy_text = "Customs@3+ or (43175279@2+ and Manufacturer@Auth2)";
  EXPECT_THROW(AbeCiphertext::deserialize(renamed.serialize()), Error);
  auto dropped = ct;
  dropped.rows.pop_back();
  EXPECT_THROW(AbeCiphertext::deserialize(dropped.serialize()), Error);
  policy::AttestationSet all;
  for (const auto& id : four().ids) all.add("Customs", id);
  EXPECT_EQ(decrypt_error(dropped, martsia::testing::issue_fdk(four(), "0xC", all, rng)),
            Errc::MalformedCiphertext);
}

TEST(Abe, TamperedRowBreaksDecryption) {
  SeededRng rng(14);
  auto value = key_from(rng);
  auto ct = abe_encrypt(params(), four().public_keys, policy::parse_policy("a@Auth1"), value, rng);
  policy::AttestationSet a;
  a.add("a", "Auth1");
  auto fdk = martsia::testing::issue_fdk(four(), "0xA", a, rng);
  ct.rows[0].c1 = ct.rows[0].c1 * params().egg;
  EXPECT_EQ(decrypt_error(ct, fdk), Errc::DecryptionFailed);
}

TEST(Kernels, ParallelMatchesSerial) {
  auto ast = policy::parse_policy(
      "Customs@3+ or (43175279@2+ and ((Supplier@1+ and International@1+) or Manufacturer@1+))");
  SeededRng r1(15), r2(15);
  auto value = r1.draw<32>();
  r2.draw<32>();
  auto serial = abe_encrypt(params(), four().public_keys, ast, value, r1, Exec::Serial);
  auto parallel = abe_encrypt(params(), four().public_keys, ast, value, r2, Exec::Parallel);
  EXPECT_EQ(serial, parallel);

  policy::AttestationSet att;
  for (auto auth : {"Auth1", "Auth2", "Auth4"}) att.add("Customs", auth);
  auto fdk = martsia::testing::issue_fdk(four(), "0xCustoms", att, r1);
  EXPECT_EQ(abe_decrypt(params(), serial, fdk, Exec::Serial), value);
  EXPECT_EQ(abe_decrypt(params(), serial, fdk, Exec::Parallel), value);

  auto lsss = policy::compile_lsss(policy::expand_thresholds(ast, four().ids));
  auto coeffs = policy::reconstruct(lsss, fdk.attributes());
  ASSERT_TRUE(coeffs);
  std::vector<kernels::DecryptRowInput> rows;
  for (auto [row, c] : *coeffs) {
    rows.push_back({&serial.rows[row], &fdk.shares.at(serial.rows[row].attribute), c});
  }
  auto h = kernels::hash_gid(fdk.gid);
  EXPECT_EQ(kernels::decrypt_rows_serial(h, rows), kernels::decrypt_rows_parallel(h, rows));
}

TEST(Abe, SmallOracleSweep) {
  // Exhaustive over 2 authorities x 2 attributes; the larger sweep lives in
  // the acceptance binary.
  martsia::testing::PolicyShape shape{{"a", "b"}, {"Auth1", "Auth2"}, 2, 2};
  auto keys = martsia::testing::make_authorities(2);
  auto family = martsia::testing::policy_family(25, shape, 4, 77);
  SeededRng rng(16);
  for (const auto& ast : family) {
    auto value = rng.draw<32>();
    auto ct = abe_encrypt(params(), keys.public_keys, ast, value, rng);
    auto universe = martsia::testing::relevant_universe(ast, shape.authorities);
    auto everything = martsia::testing::issue_fdk(keys, "0xR", martsia::testing::subset(universe, ~0ull), rng);
    for (std::uint64_t m = 0; m < (1ull << universe.size()); ++m) {
      auto att = martsia::testing::subset(universe, m);
      FullDecryptionKey fdk{"0xR", {}};
      for (const auto& a : att.namespaced()) fdk.shares.emplace(a, everything.shares.at(a));
      bool expected = policy::satisfies_oracle(ast, att, shape.authorities);
      bool ok = false;
      try {
        ok = abe_decrypt(params(), ct, fdk) == value;
      } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::PolicyNotSatisfied);
      }
      EXPECT_EQ(ok, expected) << policy::to_string(ast) << " mask " << m;
    }
  }
}

}  // namespace
}  // namespace martsia::crypto
