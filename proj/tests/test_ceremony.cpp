#include <gtest/gtest.h>

#include <algorithm>

#include "martsia/ceremony/ceremony.hpp"
#include "support.hpp"

namespace martsia::ceremony {
namespace {

using testing::address;
using testing::error_of;
using testing::rsa_key;

struct Fixture {
  std::unique_ptr<ledger::Ledger> ledger = ledger::Ledger::in_memory();
  store::MemoryStore store;
  MetadataDocument metadata;
  std::vector<Participant> parts;

  explicit Fixture(std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      auto id = "Auth" + std::to_string(i + 1);
      metadata.authorities.push_back({id, "127.0.0.1:" + std::to_string(7000 + i), rsa_key(i).verify_key()});
      parts.emplace_back(id, address(100 + i), *ledger, store);
    }
  }
  void register_all() {
    for (auto& p : parts) p.publish_metadata(metadata);
  }
  void commit_all(Rng& rng) {
    for (auto& p : parts) p.commit_round(rng);
  }
};

TEST(Metadata, EncodeDecodeIsCanonical) {
  Fixture f(3);
  auto text = f.metadata.encode();
  EXPECT_EQ(text.rfind("martsia-authorities/1\n", 0), 0u);
  auto back = MetadataDocument::decode(text);
  EXPECT_EQ(back.ids(), f.metadata.ids());
  EXPECT_EQ(back.encode(), text);
  ASSERT_NE(back.find("Auth2"), nullptr);
  EXPECT_EQ(back.find("Auth2")->endpoint, "127.0.0.1:7001");
  EXPECT_EQ(back.find("Auth9"), nullptr);
}

TEST(Metadata, ReorderingChangesTheLocator) {
  Fixture f(3);
  auto reordered = f.metadata;
  std::swap(reordered.authorities[0], reordered.authorities[2]);
  EXPECT_NE(store::Rloc::of(as_bytes(f.metadata.encode())),
            store::Rloc::of(as_bytes(reordered.encode())));
}

TEST(Metadata, DecodeRejectsNonCanonicalText) {
  Fixture f(2);
  auto text = f.metadata.encode();
  EXPECT_EQ(error_of([&] { MetadataDocument::decode(text + "extra=1\n"); }), Errc::Malformed);
  EXPECT_EQ(error_of([&] { MetadataDocument::decode("wrong header\n"); }), Errc::Malformed);
}

TEST(Seeds, XorCombination) {
  crypto::Seed a{}, b{};
  a.fill(0x0f);
  b.fill(0xff);
  std::vector<crypto::Seed> seeds{a, b};
  crypto::Seed expect{};
  expect.fill(0xf0);
  EXPECT_EQ(combine_seeds(seeds), expect);
  EXPECT_EQ(combine_seeds({}), crypto::Seed{});
}

TEST(Ceremony, HonestRunsAgree) {
  Fixture f(4);
  SeededRng rng(1);
  f.register_all();
  EXPECT_EQ(observe(*f.ledger, f.store).phase, Phase::CollectingCommitments);
  f.commit_all(rng);
  EXPECT_EQ(observe(*f.ledger, f.store).phase, Phase::CollectingOpenings);
  for (auto& p : f.parts) p.open_round();
  auto state = observe(*f.ledger, f.store);
  ASSERT_EQ(state.phase, Phase::Finalized);

  std::vector<crypto::Seed> seeds;
  for (auto& p : f.parts) seeds.push_back(*p.seed());
  auto expected = crypto::global_setup(combine_seeds(seeds));
  for (auto& p : f.parts) EXPECT_EQ(p.finalize(), expected);
  EXPECT_EQ(*state.result, expected);
  for (const auto& id : f.metadata.ids()) {
    auto entry = f.ledger->authority_get(id);
    ASSERT_TRUE(entry && entry->params_rloc);
    EXPECT_EQ(f.store.get(*entry->params_rloc), expected.serialize());
  }
}

TEST(Ceremony, OpeningOrderDoesNotMatter) {
  crypto::PublicParameters first, second;
  for (int run = 0; run < 2; ++run) {
    Fixture f(4);
    SeededRng rng(77);
    f.register_all();
    f.commit_all(rng);
    auto order = std::vector<std::size_t>{0, 1, 2, 3};
    if (run == 1) std::reverse(order.begin(), order.end());
    for (auto i : order) f.parts[i].open_round();
    (run == 0 ? first : second) = finalize(*f.ledger, f.store);
  }
  EXPECT_EQ(first, second);
}

TEST(Ceremony, TamperedOpeningNamesTheOffender) {
  Fixture f(4);
  SeededRng rng(2);
  f.register_all();
  f.commit_all(rng);
  for (std::size_t i = 0; i < 4; ++i) {
    if (i == 2) {
      auto forged = *f.parts[i].seed();
      forged[0] ^= 1;
      f.parts[i].restore_seed(forged);
    }
    f.parts[i].open_round();
  }
  try {
    finalize(*f.ledger, f.store);
    FAIL() << "tampered ceremony finalized";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::CommitmentMismatch);
    EXPECT_EQ(e.detail(), "Auth3");
  }
  auto state = observe(*f.ledger, f.store);
  EXPECT_EQ(state.phase, Phase::Aborted);
  EXPECT_EQ(state.offender, "Auth3");
  EXPECT_EQ(error_of([&] { f.parts[0].publish_keys(crypto::global_setup({}), rng); }),
            Errc::WrongPhase);
}

TEST(Ceremony, FinalizeNeedsEveryOpening) {
  Fixture f(3);
  SeededRng rng(3);
  f.register_all();
  f.commit_all(rng);
  f.parts[0].open_round();
  f.parts[1].open_round();
  EXPECT_EQ(error_of([&] { finalize(*f.ledger, f.store); }), Errc::IncompleteOpenings);
  EXPECT_EQ(observe(*f.ledger, f.store).phase, Phase::CollectingOpenings);
}

TEST(Ceremony, PhaseGuards) {
  Fixture f(3);
  SeededRng rng(4);
  f.register_all();
  f.parts[0].commit_round(rng);
  EXPECT_EQ(error_of([&] { f.parts[0].commit_round(rng); }), Errc::DuplicateCommitment);
  EXPECT_EQ(error_of([&] { f.parts[0].open_round(); }), Errc::OpeningBeforeAllCommitments);
  EXPECT_EQ(error_of([&] { f.parts[1].open_round(); }), Errc::WrongPhase);
  f.parts[1].commit_round(rng);
  f.parts[2].commit_round(rng);
  f.parts[0].open_round();
  Participant late("Auth2", address(101), *f.ledger, f.store);
  EXPECT_EQ(error_of([&] { late.commit_round(rng); }), Errc::WrongPhase);
  EXPECT_EQ(error_of([&] { f.parts[0].publish_keys(testing::params(), rng); }), Errc::WrongPhase);
}

TEST(Ceremony, PublishedKeysMatchKeypairs) {
  auto net = testing::run_ceremony(3, 5);
  for (const auto& [id, kp] : net.keypairs) {
    auto entry = net.ledger->authority_get(id);
    ASSERT_TRUE(entry && entry->public_key_rloc);
    auto pk = crypto::AuthorityPublicKey::deserialize(net.store->get(*entry->public_key_rloc));
    EXPECT_EQ(pk, kp.public_key);
    EXPECT_TRUE(crypto::keypair_consistent(net.params, kp));
  }
}

}  // namespace
}  // namespace martsia::ceremony
