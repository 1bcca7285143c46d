#include <gtest/gtest.h>

#include "martsia/envelope/envelope.hpp"
#include "martsia/policy/ast.hpp"
#include "support.hpp"

namespace martsia::envelope {
namespace {

using testing::address;
using testing::error_of;

class EnvelopeTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { auths_ = new testing::AuthoritySet(testing::make_authorities(4)); }
  static void TearDownTestSuite() { delete auths_; }

  static crypto::FullDecryptionKey fdk_for(const std::string& gid,
                                           const std::vector<std::string>& attributes) {
    policy::AttestationSet att;
    for (const auto& a : attributes) {
      for (const auto& id : auths_->ids) att.entries.insert({a, id});
    }
    SeededRng rng(std::hash<std::string>{}(gid));
    return testing::issue_fdk(*auths_, gid, att, rng);
  }

  MessageMetadata meta(const std::string& id = "22063028") const {
    return {address(1), "43175279", id};
  }

  static inline testing::AuthoritySet* auths_ = nullptr;
  SeededRng rng_{42};
};

const FieldMap kOrder = {{"item", "wheelchair ramps"}, {"quantity", "100 units"}};
const char* kPolicy = "43175279@2+ and (Manufacturer@1+ or (Supplier@1+ and International@1+))";

TEST_F(EnvelopeTest, SliceRoundTrip) {
  auto s = seal_slice(kOrder, kPolicy, testing::params(), auths_->public_keys, meta(), "62618638", rng_);
  auto reader = fdk_for(address(2), {"Manufacturer", "43175279"});
  EXPECT_EQ(open_slice(s, testing::params(), reader, meta()), kOrder);
}

TEST_F(EnvelopeTest, UnsatisfyingReaderIsRefused) {
  auto s = seal_slice(kOrder, kPolicy, testing::params(), auths_->public_keys, meta(), "62618638", rng_);
  auto reader = fdk_for(address(3), {"Supplier", "National", "43175279"});
  EXPECT_EQ(error_of([&] { open_slice(s, testing::params(), reader, meta()); }),
            Errc::PolicyNotSatisfied);
}

TEST_F(EnvelopeTest, SealRejectsBadInput) {
  const auto& pks = auths_->public_keys;
  EXPECT_EQ(error_of([&] { seal_slice({}, kPolicy, testing::params(), pks, meta(), "00000001", rng_); }),
            Errc::EmptyFields);
  EXPECT_EQ(error_of([&] {
              seal_slice(kOrder, "Manufacturer@ and", testing::params(), pks, meta(), "00000001", rng_);
            }),
            Errc::PolicyError);
  EXPECT_EQ(error_of([&] {
              seal_slice(kOrder, "Customs@5+", testing::params(), pks, meta(), "00000001", rng_);
            }),
            Errc::PolicyError);
  EXPECT_EQ(error_of([&] {
              seal_slice(kOrder, "Customs@Auth9", testing::params(), pks, meta(), "00000001", rng_);
            }),
            Errc::MissingAuthorityKey);
  FieldMap dup = {{"a", "1"}, {"a", "2"}};
  EXPECT_EQ(error_of([&] { seal_slice(dup, kPolicy, testing::params(), pks, meta(), "00000001", rng_); }),
            Errc::InvalidArgument);
  EXPECT_EQ(error_of([&] {
              seal_slice(kOrder, kPolicy, testing::params(), pks, meta("123"), "00000001", rng_);
            }),
            Errc::BadMessageId);
}

TEST_F(EnvelopeTest, SerializationIsStableAndCanonical) {
  auto env = seal_message(meta(), {{kOrder, kPolicy}, {{{"note", "for customs only"}}, "Customs@3+"}},
                          testing::params(), auths_->public_keys, rng_);
  auto text = env.serialize();
  EXPECT_EQ(text.rfind("martsia-envelope/1\n", 0), 0u);
  auto back = MessageEnvelope::parse(text);
  EXPECT_EQ(back, env);
  EXPECT_EQ(back.serialize(), text);
  EXPECT_EQ(error_of([&] { MessageEnvelope::parse(text + "zzz=1\n"); }), Errc::MalformedEnvelope);
  EXPECT_EQ(error_of([&] { MessageEnvelope::parse("martsia-envelope/2\n"); }), Errc::MalformedEnvelope);
}

TEST_F(EnvelopeTest, NoPlaintextInSerialization) {
  FieldMap fields = {{"consignee_name", "Lisbon Mobility Supplies"}, {"invoice_total", "EUR 48,250.00"}};
  auto env = seal_message(meta(), {{fields, kPolicy}}, testing::params(), auths_->public_keys, rng_);
  auto text = env.serialize();
  for (const auto& [k, v] : fields) {
    EXPECT_EQ(text.find(k), std::string::npos) << k;
    EXPECT_EQ(text.find(v), std::string::npos) << v;
  }
}

TEST_F(EnvelopeTest, OpenMessageMarksUnreadableSlices) {
  auto env = seal_message(meta(), {{kOrder, kPolicy}, {{{"note", "customs"}}, "Customs@3+"}},
                          testing::params(), auths_->public_keys, rng_);
  ASSERT_EQ(env.slices.size(), 2u);
  EXPECT_NE(env.slices[0].slice_id, env.slices[1].slice_id);
  auto results = open_message(env, testing::params(), fdk_for(address(2), {"Manufacturer", "43175279"}));
  ASSERT_EQ(results.size(), 2u);
  EXPECT_TRUE(results[0].readable());
  EXPECT_EQ(*results[0].fields, kOrder);
  EXPECT_FALSE(results[1].readable());
  EXPECT_EQ(results[1].reason, Errc::PolicyNotSatisfied);
  EXPECT_EQ(results[1].slice_id, env.slices[1].slice_id);
}

TEST_F(EnvelopeTest, TransplantedSliceIsDetected) {
  auto a = seal_message(meta("11111111"), {{kOrder, kPolicy}}, testing::params(), auths_->public_keys, rng_);
  auto b = seal_message(meta("22222222"), {{{{"x", "other"}}, kPolicy}}, testing::params(),
                        auths_->public_keys, rng_);
  b.slices[0] = a.slices[0];
  auto reader = fdk_for(address(2), {"Manufacturer", "43175279"});
  EXPECT_EQ(error_of([&] { open_message(b, testing::params(), reader); }), Errc::IntegrityFailure);
  // Renaming the slice inside its own envelope is caught the same way.
  a.slices[0].slice_id = "33333333";
  EXPECT_EQ(error_of([&] { open_message(a, testing::params(), reader); }), Errc::IntegrityFailure);
}

TEST_F(EnvelopeTest, EveryBodyMutationIsDetected) {
  auto s = seal_slice(kOrder, kPolicy, testing::params(), auths_->public_keys, meta(), "62618638", rng_);
  auto reader = fdk_for(address(2), {"Manufacturer", "43175279"});
  for (std::size_t i = 0; i < s.encrypted_fields.size(); i += 3) {
    auto t = s;
    t.encrypted_fields[i] ^= 0x01;
    EXPECT_EQ(error_of([&] { open_slice(t, testing::params(), reader, meta()); }), Errc::IntegrityFailure);
  }
  for (std::size_t i = 0; i < s.nonce.size(); ++i) {
    auto t = s;
    t.nonce[i] ^= 0x80;
    EXPECT_EQ(error_of([&] { open_slice(t, testing::params(), reader, meta()); }), Errc::IntegrityFailure);
  }
  auto t = s;
  t.encrypted_field_index.back() ^= 1;
  EXPECT_EQ(error_of([&] { open_slice(t, testing::params(), reader, meta()); }), Errc::IntegrityFailure);
  t = s;
  t.wrapped_key.wrapped_value[0] ^= 1;
  EXPECT_NE(error_of([&] { open_slice(t, testing::params(), reader, meta()); }), Errc::InvalidArgument);
  auto other = meta();
  other.sender_address = address(9);
  EXPECT_EQ(error_of([&] { open_slice(s, testing::params(), reader, other); }), Errc::IntegrityFailure);
}

TEST_F(EnvelopeTest, KeysAreFresh) {
  auto a = seal_slice(kOrder, kPolicy, testing::params(), auths_->public_keys, meta(), "62618638", rng_);
  auto b = seal_slice(kOrder, kPolicy, testing::params(), auths_->public_keys, meta(), "62618638", rng_);
  EXPECT_NE(a.wrapped_key.wrapped_value, b.wrapped_key.wrapped_value);
  EXPECT_NE(a.encrypted_fields, b.encrypted_fields);
  EXPECT_NE(a.nonce, b.nonce);
}

TEST_F(EnvelopeTest, RandomIdsAreEightDigits) {
  SeededRng rng(5);
  for (int i = 0; i < 200; ++i) {
    auto id = random_id8(rng);
    ASSERT_EQ(id.size(), 8u);
    EXPECT_TRUE(std::all_of(id.begin(), id.end(), ::isdigit));
  }
}

}  // namespace
}  // namespace martsia::envelope
