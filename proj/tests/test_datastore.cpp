#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <thread>

#include "martsia/error.hpp"
#include "martsia/store/datastore.hpp"
#include "support.hpp"

namespace martsia::store {
namespace {

using testing::error_of;
using testing::TempDir;

class StoreTest : public ::testing::TestWithParam<bool> {
 protected:
  void SetUp() override {
    if (GetParam()) {
      store_ = std::make_unique<DirectoryStore>(dir_.path());
    } else {
      store_ = std::make_unique<MemoryStore>();
    }
  }
  TempDir dir_;
  std::unique_ptr<DataStore> store_;
};

TEST_P(StoreTest, PutIsIdempotentAndContentAddressed) {
  auto a = store_->put(as_bytes("first object"));
  auto b = store_->put(as_bytes("first object"));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, Rloc::of(as_bytes("first object")));
  EXPECT_NE(a, store_->put(as_bytes("second object")));
  EXPECT_EQ(to_string(store_->get(a)), "first object");
  EXPECT_EQ(store_->list().size(), 2u);
}

TEST_P(StoreTest, RejectsEmptyContent) {
  EXPECT_EQ(error_of([&] { store_->put({}); }), Errc::EmptyContent);
}

TEST_P(StoreTest, MissingObjectIsNotFound) {
  auto rloc = Rloc::of(as_bytes("never stored"));
  EXPECT_FALSE(store_->contains(rloc));
  EXPECT_EQ(error_of([&] { store_->get(rloc); }), Errc::NotFound);
}

TEST_P(StoreTest, RlocTextRoundTrips) {
  auto rloc = store_->put(as_bytes("x"));
  EXPECT_EQ(Rloc::parse(rloc.text()), rloc);
  EXPECT_EQ(rloc.text().substr(0, 5), "h256:");
}

TEST_P(StoreTest, ConcurrentIdenticalPutsConverge) {
  std::vector<std::thread> threads;
  std::vector<Rloc> results(16);
  Bytes content(100000, 0x42);
  for (std::size_t i = 0; i < results.size(); ++i) {
    threads.emplace_back([&, i] { results[i] = store_->put(content); });
  }
  for (auto& t : threads) t.join();
  for (const auto& r : results) EXPECT_EQ(r, results[0]);
  EXPECT_EQ(store_->get(results[0]), content);
  EXPECT_EQ(store_->list().size(), 1u);
}

INSTANTIATE_TEST_SUITE_P(Backends, StoreTest, ::testing::Values(false, true),
                         [](const auto& info) { return info.param ? "Directory" : "Memory"; });

TEST(DirectoryStore, TamperedObjectFailsIntegrity) {
  TempDir dir;
  DirectoryStore store(dir.path());
  auto rloc = store.put(as_bytes("manifest v1"));
  {
    std::ofstream out(store.object_path(rloc), std::ios::binary | std::ios::trunc);
    out << "manifest v2";
  }
  EXPECT_EQ(error_of([&] { store.get(rloc); }), Errc::IntegrityFailure);
}

TEST(DirectoryStore, ObjectsSurviveReopen) {
  TempDir dir;
  Rloc rloc;
  {
    DirectoryStore store(dir.path());
    rloc = store.put(as_bytes("persisted"));
  }
  DirectoryStore again(dir.path());
  EXPECT_EQ(to_string(again.get(rloc)), "persisted");
  EXPECT_EQ(again.list(), std::vector<Rloc>{rloc});
}

TEST(DirectoryStore, ListIsSorted) {
  TempDir dir;
  DirectoryStore store(dir.path());
  for (int i = 0; i < 20; ++i) store.put(as_bytes("object " + std::to_string(i)));
  auto all = store.list();
  EXPECT_EQ(all.size(), 20u);
  EXPECT_TRUE(std::is_sorted(all.begin(), all.end()));
}

}  // namespace
}  // namespace martsia::store
