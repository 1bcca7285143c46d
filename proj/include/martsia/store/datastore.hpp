#pragma once

// Content-addressed object store. An object's locator is the SHA-256 of its
// bytes, so every read can be checked against the address it came from.

#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "martsia/bytes.hpp"
#include "martsia/crypto/hash.hpp"

namespace martsia::store {

/// Resource locator. Text form `h256:<64 lowercase hex>`.
struct Rloc {
  crypto::Digest digest;

  static Rloc of(ByteView content) { return {crypto::hash256(content)}; }
  static Rloc parse(std::string_view text) { return {crypto::Digest::from_text(text)}; }
  std::string text() const { return digest.text(); }

  auto operator<=>(const Rloc&) const = default;
};

/// Append-only: there is no delete or overwrite.
class DataStore {
 public:
  virtual ~DataStore() = default;

  /// Idempotent. Throws EmptyContent, StorageFailure.
  virtual Rloc put(ByteView content) = 0;
  /// Verifies the bytes against the locator. Throws NotFound, IntegrityFailure.
  virtual Bytes get(const Rloc& rloc) const = 0;
  virtual bool contains(const Rloc& rloc) const = 0;
  /// All stored locators, sorted.
  virtual std::vector<Rloc> list() const = 0;
};

class MemoryStore final : public DataStore {
 public:
  Rloc put(ByteView content) override;
  Bytes get(const Rloc& rloc) const override;
  bool contains(const Rloc& rloc) const override;
  std::vector<Rloc> list() const override;

 private:
  mutable std::mutex mu_;
  std::map<Rloc, Bytes> objects_;
};

/// One file per object at `<root>/objects/<2 hex>/<62 hex>`, written via a
/// temporary file and rename so concurrent identical puts converge.
class DirectoryStore final : public DataStore {
 public:
  explicit DirectoryStore(std::filesystem::path root);

  Rloc put(ByteView content) override;
  Bytes get(const Rloc& rloc) const override;
  bool contains(const Rloc& rloc) const override;
  std::vector<Rloc> list() const override;

  std::filesystem::path object_path(const Rloc& rloc) const;
  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
};

}  // namespace martsia::store
