#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <thread>

#include "martsia/ledger/ledger.hpp"
#include "support.hpp"

namespace martsia::ledger {
namespace {

using testing::address;
using testing::error_of;
using testing::TempDir;

Rloc rloc_of(std::string_view s) { return Rloc::of(as_bytes(s)); }

const std::vector<std::string> kIds = {"Auth1", "Auth2", "Auth3"};

void register_all(Ledger& l) {
  for (std::size_t i = 0; i < kIds.size(); ++i) {
    l.authority_post_metadata(address(i), kIds[i], rloc_of("metadata"), kIds);
  }
}

TEST(Address, Format) {
  EXPECT_TRUE(is_address("0x" + std::string(40, 'a')));
  EXPECT_TRUE(is_address("0xAbCdEf0123456789abcdef0123456789ABCDEF01"));
  EXPECT_FALSE(is_address("0x" + std::string(39, 'a')));
  EXPECT_FALSE(is_address(std::string(42, 'a')));
  EXPECT_FALSE(is_address("0x" + std::string(39, 'a') + "g"));
  EXPECT_TRUE(is_message_id("00000042"));
  EXPECT_FALSE(is_message_id("4200000"));
  EXPECT_FALSE(is_message_id("4200000a"));
}

TEST(Record, EncodeDecodeRoundTrip) {
  LedgerRecord r{7, address(1), Contract::Certifier, "set", {0x00, 0xff, 0x10}, 8};
  auto line = r.encode();
  EXPECT_EQ(line.find('\n'), std::string::npos);
  EXPECT_EQ(LedgerRecord::decode(line), r);
  EXPECT_EQ(line, "action=set contract=Certifier payload=00ff10 sender=" + address(1) +
                      " timestamp=8 tx=7");
}

TEST(Record, DecodeRejectsGarbage) {
  EXPECT_EQ(error_of([] { LedgerRecord::decode("action=set"); }), Errc::Malformed);
  EXPECT_EQ(error_of([] { LedgerRecord::decode("not a record"); }), Errc::Malformed);
}

TEST(Ledger, TxIndicesAreSequential) {
  auto l = Ledger::in_memory();
  EXPECT_EQ(l->message_announce(address(1), "00000001", rloc_of("a")), 0u);
  EXPECT_EQ(l->message_announce(address(1), "00000002", rloc_of("b")), 1u);
  EXPECT_EQ(l->certifier_set(address(2), rloc_of("c"), address(3)), 2u);
  auto records = l->records();
  ASSERT_EQ(records.size(), 3u);
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_EQ(records[i].tx_index, i);
    EXPECT_EQ(records[i].timestamp, i + 1);
  }
}

TEST(Ledger, RejectedAppendLeavesNoTrace) {
  auto l = Ledger::in_memory();
  l->message_announce(address(1), "12345678", rloc_of("a"));
  EXPECT_EQ(error_of([&] { l->message_announce(address(2), "12345678", rloc_of("b")); }),
            Errc::DuplicateMessageId);
  EXPECT_EQ(error_of([&] { l->message_announce(address(2), "1234", rloc_of("b")); }),
            Errc::BadMessageId);
  EXPECT_EQ(error_of([&] { l->message_announce("0xnope", "12345679", rloc_of("b")); }),
            Errc::BadAddress);
  EXPECT_EQ(error_of([&] { l->certifier_set("reader", rloc_of("b"), address(1)); }),
            Errc::BadAddress);
  EXPECT_EQ(l->records().size(), 1u);
  EXPECT_EQ(l->message_announce(address(2), "12345679", rloc_of("b")), 1u);
}

TEST(Ledger, MessageLookup) {
  auto l = Ledger::in_memory();
  l->message_announce(address(4), "22063028", rloc_of("env"));
  auto m = l->message_get("22063028");
  EXPECT_EQ(m.sender_address, address(4));
  EXPECT_EQ(m.envelope_rloc, rloc_of("env"));
  EXPECT_TRUE(l->message_exists("22063028"));
  EXPECT_EQ(error_of([&] { l->message_get("22063029"); }), Errc::NotFound);
  EXPECT_EQ(error_of([&] { l->message_get("x"); }), Errc::BadMessageId);
}

TEST(Ledger, CertifierEntriesAccumulate) {
  auto l = Ledger::in_memory();
  l->certifier_set(address(5), rloc_of("one"), address(1));
  l->certifier_set(address(5), rloc_of("two"), address(2));
  auto entries = l->certifier_get(address(5));
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_EQ(entries[0].certifier_address, address(1));
  EXPECT_EQ(entries[1].attributes_rloc, rloc_of("two"));
  EXPECT_TRUE(l->certifier_get(address(6)).empty());
}

TEST(Ledger, ResolverGuardsCertifications) {
  auto l = Ledger::in_memory();
  store::MemoryStore store;
  auto known = store.put(as_bytes("attestation"));
  l->set_resolver([&](const Rloc& r) { return store.contains(r); });
  EXPECT_NO_THROW(l->certifier_set(address(5), known, address(1)));
  EXPECT_EQ(error_of([&] { l->certifier_set(address(5), rloc_of("dangling"), address(1)); }),
            Errc::UnresolvableRloc);
}

TEST(AuthorityContract, FirstMetadataFixesTheSet) {
  auto l = Ledger::in_memory();
  register_all(*l);
  EXPECT_EQ(l->registered_authorities(), kIds);
  EXPECT_EQ(error_of([&] {
              l->authority_post_metadata(address(9), "Auth9", rloc_of("m"), {"Auth9"});
            }),
            Errc::UnknownAuthority);
  EXPECT_EQ(error_of([&] { l->authority_post_metadata(address(0), "Auth1", rloc_of("m"), kIds); }),
            Errc::DuplicateEntry);
}

TEST(AuthorityContract, SenderIsBoundToAuthority) {
  auto l = Ledger::in_memory();
  register_all(*l);
  crypto::Commitment c{crypto::hash256("c")};
  EXPECT_EQ(error_of([&] { l->authority_post_commitment(address(1), "Auth1", c); }),
            Errc::UnknownAuthority);
  EXPECT_NO_THROW(l->authority_post_commitment(address(0), "Auth1", c));
}

TEST(AuthorityContract, CommitThenOpenOrdering) {
  auto l = Ledger::in_memory();
  register_all(*l);
  crypto::Commitment c{crypto::hash256("c")};
  l->authority_post_commitment(address(0), "Auth1", c);
  EXPECT_EQ(error_of([&] { l->authority_post_commitment(address(0), "Auth1", c); }),
            Errc::DuplicateCommitment);
  EXPECT_EQ(error_of([&] { l->authority_post_opening(address(0), "Auth1", rloc_of("o")); }),
            Errc::OpeningBeforeAllCommitments);
  l->authority_post_commitment(address(1), "Auth2", c);
  l->authority_post_commitment(address(2), "Auth3", c);
  EXPECT_TRUE(l->state().all_committed());
  EXPECT_NO_THROW(l->authority_post_opening(address(0), "Auth1", rloc_of("o")));
  EXPECT_EQ(error_of([&] { l->authority_post_opening(address(0), "Auth1", rloc_of("o")); }),
            Errc::DuplicateEntry);
  auto e = l->authority_get("Auth1");
  ASSERT_TRUE(e);
  EXPECT_EQ(e->opening_rloc, rloc_of("o"));
  EXPECT_FALSE(l->authority_get("Auth7"));
}

TEST(Replay, ReproducesLiveState) {
  auto l = Ledger::in_memory();
  register_all(*l);
  l->certifier_set(address(5), rloc_of("att"), address(6));
  l->message_announce(address(7), "00000007", rloc_of("env"));
  EXPECT_EQ(ContractState::replay(l->records()), l->state());
}

TEST(Replay, RejectsReorderedLog) {
  auto l = Ledger::in_memory();
  l->message_announce(address(7), "00000007", rloc_of("env"));
  l->message_announce(address(7), "00000008", rloc_of("env"));
  auto records = l->records();
  std::swap(records[0], records[1]);
  EXPECT_EQ(error_of([&] { ContractState::replay(records); }), Errc::Malformed);
}

TEST(FileLedger, ReopenRestoresState) {
  TempDir dir;
  auto path = std::filesystem::path(dir.path()) / "ledger.log";
  ContractState before;
  {
    auto l = Ledger::open(path);
    register_all(*l);
    l->message_announce(address(7), "00000007", rloc_of("env"));
    before = l->state();
  }
  auto l = Ledger::open(path);
  EXPECT_EQ(l->state(), before);
  EXPECT_EQ(l->message_announce(address(7), "00000008", rloc_of("env")), 4u);
}

TEST(FileLedger, InstancesSharingAFileSeeEachOther) {
  TempDir dir;
  auto path = std::filesystem::path(dir.path()) / "ledger.log";
  auto a = Ledger::open(path);
  auto b = Ledger::open(path);
  a->message_announce(address(1), "00000001", rloc_of("x"));
  EXPECT_TRUE(b->message_exists("00000001"));
  EXPECT_EQ(error_of([&] { b->message_announce(address(2), "00000001", rloc_of("y")); }),
            Errc::DuplicateMessageId);
  EXPECT_EQ(b->message_announce(address(2), "00000002", rloc_of("y")), 1u);
  EXPECT_EQ(a->records().size(), 2u);
}

TEST(FileLedger, ConcurrentWritersGetDistinctIndices) {
  TempDir dir;
  auto path = std::filesystem::path(dir.path()) / "ledger.log";
  constexpr int kThreads = 4, kEach = 25;
  std::vector<std::thread> threads;
  for (int t = 0; t < kThreads; ++t) {
    threads.emplace_back([&, t] {
      auto l = Ledger::open(path);
      for (int i = 0; i < kEach; ++i) {
        char id[9];
        std::snprintf(id, sizeof id, "%08d", t * 1000 + i);
        l->message_announce(address(t), id, rloc_of(id));
      }
    });
  }
  for (auto& t : threads) t.join();
  auto l = Ledger::open(path);
  auto records = l->records();
  ASSERT_EQ(records.size(), std::size_t(kThreads * kEach));
  for (std::size_t i = 0; i < records.size(); ++i) EXPECT_EQ(records[i].tx_index, i);
}

TEST(FileLedger, IgnoresTornTrailingLine) {
  TempDir dir;
  auto path = std::filesystem::path(dir.path()) / "ledger.log";
  {
    auto l = Ledger::open(path);
    l->message_announce(address(1), "00000001", rloc_of("x"));
  }
  {
    std::ofstream out(path, std::ios::app);
    out << "action=announce contract=Mess";
  }
  auto l = Ledger::open(path);
  EXPECT_EQ(l->records().size(), 1u);
  l->message_announce(address(1), "00000002", rloc_of("y"));
  auto reopened = Ledger::open(path);
  EXPECT_EQ(reopened->records().size(), 2u);
}

}  // namespace
}  // namespace martsia::ledger
