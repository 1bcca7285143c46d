#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>

#include "martsia/client/client.hpp"
#include "scenario.hpp"
#include "support.hpp"

namespace martsia::client {
namespace {

using testing::address;
using testing::error_of;
using testing::Scenario;
using testing::TempDir;

bool listed(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

class ClientTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir();
    scenario_ = new Scenario(dir_->path());
  }
  static void TearDownTestSuite() {
    delete scenario_;
    delete dir_;
  }
  static Deployment dep() { return scenario_->deployment(); }

  static inline TempDir* dir_ = nullptr;
  static inline Scenario* scenario_ = nullptr;
  SystemRng rng_;
};

TEST_F(ClientTest, HonestCeremonyIsConsistent) {
  auto report = verify_authority_consistency(dep());
  EXPECT_TRUE(report.consistent()) << report.to_text();
  EXPECT_EQ(report.authorities, scenario_->authority_ids());
  EXPECT_NE(report.to_text().find("consistent=true"), std::string::npos);
}

TEST_F(ClientTest, EmptyLedgerHasNoArtifacts) {
  auto l = ledger::Ledger::in_memory();
  store::MemoryStore s;
  EXPECT_EQ(error_of([&] { verify_authority_consistency({*l, s}); }), Errc::MissingArtifacts);
}

TEST_F(ClientTest, DivergentMetadataIsNamed) {
  auto l = ledger::Ledger::in_memory();
  store::MemoryStore s;
  ceremony::MetadataDocument doc;
  for (int i = 0; i < 3; ++i) {
    doc.authorities.push_back({"Auth" + std::to_string(i + 1), "127.0.0.1:1", testing::rsa_key(i).verify_key()});
  }
  auto other = doc;
  std::swap(other.authorities[0], other.authorities[1]);
  for (int i = 0; i < 3; ++i) {
    ceremony::Participant p(doc.authorities[i].authority_id, address(100 + i), *l, s);
    if (i == 2) {
      auto rloc = s.put(as_bytes(other.encode()));
      l->authority_post_metadata(address(102), "Auth3", rloc, doc.ids());
    } else {
      p.publish_metadata(doc);
    }
  }
  auto report = verify_authority_consistency({*l, s});
  EXPECT_FALSE(report.consistent());
  EXPECT_EQ(report.metadata.divergent, std::vector<std::string>{"Auth3"});
  EXPECT_EQ(report.params.missing.size(), 3u);
  SeededRng rng(1);
  auto owner = ActorProfile{Role::Owner, address(1), testing::rsa_key(1), dir_->path()};
  EXPECT_EQ(error_of([&] { send_message(owner, {*l, s}, "43175279", testing::load_corpus("purchase_order"), rng); }),
            Errc::ConsistencyCheckFailed);
}

TEST_F(ClientTest, RunningExampleMatrix) {
  std::map<std::string, SendReceipt> sent;
  for (const auto& [stem, _] : testing::corpus_messages()) sent[stem] = scenario_->send(stem, rng_);
  for (const auto& actor : scenario_->actors()) {
    std::map<std::string, std::vector<envelope::SliceResult>> results;
    for (const auto& [stem, receipt] : sent) {
      results[stem] = read_message(actor.profile, dep(), receipt.message_id, scenario_->fdk(actor.name));
    }
    for (const auto& slice : testing::expected_matrix()) {
      const auto& r = results.at(slice.message).at(slice.index);
      EXPECT_EQ(r.readable(), listed(slice.readers, actor.name))
          << actor.name << " on " << slice.message << " slice " << slice.index + 1;
      if (r.readable()) {
        EXPECT_EQ(*r.fields, testing::load_corpus(slice.message).at(slice.index).fields);
      }
    }
  }
}

TEST_F(ClientTest, EnvelopesAreStoredWithoutPlaintext) {
  auto receipt = scenario_->send("export_document", rng_);
  auto text = to_string(scenario_->store().get(receipt.rloc));
  for (const auto& s : testing::corpus_strings()) EXPECT_EQ(text.find(s), std::string::npos) << s;
  auto entry = scenario_->ledger().message_get(receipt.message_id);
  EXPECT_EQ(entry.envelope_rloc, receipt.rloc);
  EXPECT_EQ(find_message_by_rloc(dep(), receipt.rloc).message_id, receipt.message_id);
}

TEST_F(ClientTest, MessageIdCollisionsAreRetried) {
  SeededRng probe(99);
  auto first_id = envelope::random_id8(probe);
  SeededRng a(99), b(99);
  auto r1 = client::send_message(scenario_->actor("Manufacturer").profile, dep(), "43175279",
                                 testing::load_corpus("purchase_order"), a);
  EXPECT_EQ(r1.message_id, first_id);
  auto r2 = client::send_message(scenario_->actor("Manufacturer").profile, dep(), "43175279",
                                 testing::load_corpus("purchase_order"), b);
  EXPECT_NE(r2.message_id, r1.message_id);
}

TEST_F(ClientTest, TamperedEnvelopeFailsBeforeDecryption) {
  auto receipt = scenario_->send("customs_clearance", rng_);
  auto path = scenario_->store().object_path(receipt.rloc);
  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  bytes[bytes.size() / 2] ^= 0x01;
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << bytes;
  }
  const auto& m = scenario_->actor("Manufacturer");
  EXPECT_EQ(error_of([&] { read_message(m.profile, dep(), receipt.message_id, scenario_->fdk(m.name)); }),
            Errc::IntegrityFailure);
  bytes[bytes.size() / 2] ^= 0x01;
  std::ofstream(path, std::ios::binary | std::ios::trunc) << bytes;
  EXPECT_EQ(read_message(m.profile, dep(), receipt.message_id, scenario_->fdk(m.name)).size(), 1u);
}

TEST_F(ClientTest, UnknownMessage) {
  const auto& m = scenario_->actor("Manufacturer");
  EXPECT_EQ(error_of([&] { read_message(m.profile, dep(), "00000000", scenario_->fdk(m.name)); }),
            Errc::NotFound);
}

TEST_F(ClientTest, UncertifiedReaderObtainsNoShares) {
  TempDir keys;
  auto stranger = ActorProfile::create(Role::Reader, address(400), keys.path(), testing::rsa_key(30));
  EXPECT_EQ(error_of([&] { request_keys(stranger, dep()); }), Errc::NoSharesObtained);
}

TEST_F(ClientTest, ImpostorSignatureIsRejected) {
  TempDir keys;
  const auto& real = scenario_->actor("Customer");
  auto impostor = ActorProfile::create(Role::Reader, real.profile.address, keys.path(), testing::rsa_key(31));
  EXPECT_EQ(error_of([&] { request_keys(impostor, dep()); }), Errc::SignatureRejected);
}

TEST_F(ClientTest, ComplementaryCertifiersAreUnited) {
  TempDir keys;
  auto reader = ActorProfile::create(Role::Reader, address(401), keys.path(), testing::rsa_key(32));
  auto second = ActorProfile{Role::Certifier, address(301), testing::rsa_key(18), keys.path()};
  certify_reader(scenario_->certifier(), dep(), reader.address, reader.address, {"Manufacturer"},
                 reader.verify_key());
  certify_reader(second, dep(), reader.address, reader.address, {"43175279"}, reader.verify_key());
  auto result = request_keys(reader, dep());
  EXPECT_EQ(result.fdk.shares.size(), 8u);
  EXPECT_TRUE(result.warnings.empty());
  auto receipt = scenario_->send("purchase_order", rng_);
  auto slices = read_message(reader, dep(), receipt.message_id, result.fdk);
  EXPECT_TRUE(slices.at(0).readable());
}

TEST_F(ClientTest, CertifyRejectsBadInput) {
  const auto& r = scenario_->actor("Customer").profile;
  EXPECT_EQ(error_of([&] { certify_reader(scenario_->certifier(), dep(), r.address, r.address, {}, r.verify_key()); }),
            Errc::EmptyFields);
  EXPECT_EQ(error_of([&] { certify_reader(scenario_->certifier(), dep(), r.address, address(1), {"X"}, r.verify_key()); }),
            Errc::InvalidArgument);
  EXPECT_EQ(error_of([&] { certify_reader(scenario_->certifier(), dep(), "bob", "bob", {"X"}, r.verify_key()); }),
            Errc::BadAddress);
}

TEST_F(ClientTest, ReadMessageChecksKeyOwnership) {
  auto receipt = scenario_->send("purchase_order", rng_);
  EXPECT_EQ(error_of([&] {
              read_message(scenario_->actor("Customer").profile, dep(), receipt.message_id,
                           scenario_->fdk("Manufacturer"));
            }),
            Errc::InvalidArgument);
}

TEST_F(ClientTest, InterceptRewritesOnlyMarkedArguments) {
  const auto& owner = scenario_->actor("Manufacturer").profile;
  std::vector<std::string> args = {"PO-7781", "@MARTSIA:item=wheelchair ramps;quantity=100"};
  auto before = scenario_->ledger().records().size();
  auto result = intercept(args, owner, dep(), "43175279",
                          "43175279@2+ and (Manufacturer@1+ or (Supplier@1+ and International@1+))", rng_);
  ASSERT_EQ(result.arguments.size(), 2u);
  EXPECT_EQ(result.arguments[0], "PO-7781");
  EXPECT_EQ(result.arguments[1].rfind("@MARTSIA:h256:", 0), 0u);
  EXPECT_EQ(result.arguments[1].size(), std::string("@MARTSIA:h256:").size() + 64);
  EXPECT_EQ(scenario_->ledger().records().size(), before + 1);
  EXPECT_FALSE(result.details[0].secured);
  EXPECT_TRUE(result.details[1].secured);

  auto rloc = store::Rloc::parse(*result.details[1].replacement);
  auto entry = find_message_by_rloc(dep(), rloc);
  const auto& supplier = scenario_->actor("International supplier");
  auto slices = read_message(supplier.profile, dep(), entry.message_id, scenario_->fdk(supplier.name));
  envelope::FieldMap expect = {{"item", "wheelchair ramps"}, {"quantity", "100"}};
  EXPECT_EQ(slices.at(0).fields, expect);

  std::vector<std::string> plain = {"a", "b", ""};
  EXPECT_EQ(intercept(plain, owner, dep(), "43175279", "Customs@1+", rng_).arguments, plain);
}

TEST(Intercept, FieldSplitting) {
  EXPECT_EQ(intercept_fields("a=1;b=two"), (envelope::FieldMap{{"a", "1"}, {"b", "two"}}));
  EXPECT_EQ(intercept_fields("just text"), (envelope::FieldMap{{"data", "just text"}}));
  EXPECT_EQ(intercept_fields("a=1;a=2"), (envelope::FieldMap{{"data", "a=1;a=2"}}));
  EXPECT_EQ(intercept_fields("=x"), (envelope::FieldMap{{"data", "=x"}}));
}

TEST_F(ClientTest, AuditOfHonestDeploymentIsClean) {
  scenario_->send("purchase_order", rng_);
  auto report = audit(dep());
  EXPECT_TRUE(report.ok()) << report.to_text();
  EXPECT_GT(report.objects_checked, 10u);
  EXPECT_EQ(report.records, scenario_->ledger().records().size());
}

TEST(Audit, FlagsTamperedObjects) {
  TempDir dir;
  auto l = ledger::Ledger::in_memory();
  store::DirectoryStore s(dir.path());
  auto rloc = s.put(as_bytes("not an envelope"));
  l->message_announce(address(1), "12345678", rloc);
  auto report = audit({*l, s});
  EXPECT_FALSE(report.ok());
  ASSERT_EQ(report.problems.size(), 1u);
  EXPECT_NE(report.problems[0].find("envelope of message 12345678"), std::string::npos);
  std::ofstream(s.object_path(rloc), std::ios::trunc) << "changed";
  EXPECT_EQ(audit({*l, s}).problems.size(), 2u);
}

TEST(SliceSpecs, ParseAndFormat) {
  auto specs = parse_slice_specs(
      "martsia-slices/1\n# c\n[slice]\npolicy = A@1+ or B@2+\nfield x = hello = world\n"
      "field y =   spaced  \n[slice]\npolicy=C@1+\nfield z=1\n");
  ASSERT_EQ(specs.size(), 2u);
  EXPECT_EQ(specs[0].policy_text, "A@1+ or B@2+");
  EXPECT_EQ(specs[0].fields, (envelope::FieldMap{{"x", "hello = world"}, {"y", "spaced"}}));
  EXPECT_EQ(parse_slice_specs(format_slice_specs(specs))[1].fields, specs[1].fields);
  EXPECT_EQ(error_of([] { parse_slice_specs("martsia-slices/1\n[slice]\nfield a = 1\n"); }), Errc::Malformed);
  EXPECT_EQ(error_of([] { parse_slice_specs("martsia-slices/1\npolicy = A@1+\n"); }), Errc::Malformed);
  EXPECT_EQ(error_of([] { parse_slice_specs("[slice]\n"); }), Errc::Malformed);
  EXPECT_EQ(error_of([] { parse_slice_specs("martsia-slices/1\n[slice]\npolicy = A@1+\nfield a = 1\nfield a = 2\n"); }),
            Errc::Malformed);
}

TEST(SliceSpecs, CorpusLoads) {
  EXPECT_EQ(testing::load_corpus("purchase_order").size(), 1u);
  EXPECT_EQ(testing::load_corpus("export_document").size(), 4u);
  EXPECT_EQ(testing::load_corpus("customs_clearance").size(), 1u);
}

TEST(Profile, SaveLoadRoundTrip) {
  TempDir dir;
  auto p = ActorProfile::create(Role::Owner, address(5), dir.path(), testing::rsa_key(5));
  auto q = ActorProfile::load(dir.path());
  EXPECT_EQ(q.role, Role::Owner);
  EXPECT_EQ(q.address, p.address);
  EXPECT_EQ(q.verify_key(), p.verify_key());
  EXPECT_EQ(error_of([&] { ActorProfile::create(Role::Owner, "0x12", dir.path(), testing::rsa_key(5)); }),
            Errc::BadAddress);
  EXPECT_EQ(error_of([&] { ActorProfile::load(std::filesystem::path(dir.path()) / "missing"); }),
            Errc::NotFound);
  EXPECT_EQ(parse_role("Reader"), Role::Reader);
}

TEST(FdkCache, PassphraseProtected) {
  TempDir dir;
  auto auths = testing::make_authorities(2);
  SeededRng rng(4);
  policy::AttestationSet att;
  att.entries.insert({"Customer", "Auth1"});
  auto fdk = testing::issue_fdk(auths, address(3), att, rng);
  auto path = std::filesystem::path(dir.path()) / "fdk.cache";
  EXPECT_FALSE(fdk_cache::load(path, "pw"));
  fdk_cache::save(path, fdk, "correct horse", rng);
  auto back = fdk_cache::load(path, "correct horse");
  ASSERT_TRUE(back);
  EXPECT_EQ(back->serialize(), fdk.serialize());
  EXPECT_EQ(error_of([&] { fdk_cache::load(path, "wrong"); }), Errc::AuthenticationFailed);
}

// Runs last in the suite: it takes an authority down for good.
TEST_F(ClientTest, ZzOneAuthorityDownStillDecrypts) {
  scenario_->stop_authority("Auth4");
  const auto& supplier = scenario_->actor("International supplier");
  auto result = request_keys(supplier.profile, dep(), {}, 2000);
  ASSERT_EQ(result.warnings.size(), 1u);
  EXPECT_NE(result.warnings[0].find("Auth4"), std::string::npos);
  EXPECT_EQ(result.shares_per_authority.count("Auth4"), 0u);
  auto receipt = scenario_->send("purchase_order", rng_);
  auto slices = read_message(supplier.profile, dep(), receipt.message_id, result.fdk);
  EXPECT_TRUE(slices.at(0).readable());
}

}  // namespace
}  // namespace martsia::client
