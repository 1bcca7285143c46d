#pragma once

// Append-only simulation of the Authority, Attribute-Certifier and Message
// contracts. Every state change is a LedgerRecord; contract state is a pure
// fold over the record log, so replaying the log reproduces live state.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "martsia/bytes.hpp"
#include "martsia/crypto/hash.hpp"
#include "martsia/store/datastore.hpp"

namespace martsia::ledger {

using store::Rloc;

enum class Contract { Authority, Certifier, Message };

std::string_view contract_name(Contract c);
Contract parse_contract(std::string_view name);

/// `0x` followed by 40 hex digits.
bool is_address(std::string_view s);
/// Eight decimal digits.
bool is_message_id(std::string_view s);

struct LedgerRecord {
  std::uint64_t tx_index = 0;
  std::string sender;
  Contract contract = Contract::Message;
  std::string action;
  Bytes payload;
  std::uint64_t timestamp = 0;  // logical clock

  /// One line, key-sorted `k=v` pairs, payload in hex, no trailing newline.
  std::string encode() const;
  static LedgerRecord decode(std::string_view line);
  bool operator==(const LedgerRecord&) const = default;
};

// Action names as they appear in the log.
namespace action {
inline constexpr std::string_view kPostMetadata = "post_metadata";
inline constexpr std::string_view kPostCommitment = "post_commitment";
inline constexpr std::string_view kPostOpening = "post_opening";
inline constexpr std::string_view kPostPublicKey = "post_public_key";
inline constexpr std::string_view kPostParams = "post_params";
inline constexpr std::string_view kCertifierSet = "set";
inline constexpr std::string_view kAnnounce = "announce";
}  // namespace action

struct AuthorityEntry {
  std::string authority_id;
  std::string sender;
  std::optional<Rloc> metadata_rloc;
  std::optional<crypto::Commitment> commitment;
  std::optional<Rloc> opening_rloc;
  std::optional<Rloc> public_key_rloc;
  std::optional<Rloc> params_rloc;
  bool operator==(const AuthorityEntry&) const = default;
};

struct CertifierEntry {
  std::string reader_address;
  Rloc attributes_rloc;
  std::string certifier_address;
  std::uint64_t tx_index = 0;
  bool operator==(const CertifierEntry&) const = default;
};

struct MessageEntry {
  std::string message_id;
  std::string sender_address;
  Rloc envelope_rloc;
  std::uint64_t tx_index = 0;
  bool operator==(const MessageEntry&) const = default;
};

/// Contract storage. `apply` validates a record against the current state
/// and then mutates; it is the only mutation path, shared by live appends
/// and replay.
class ContractState {
 public:
  void apply(const LedgerRecord& record);

  /// Fixed by the first metadata post; empty before that.
  const std::vector<std::string>& registered_authorities() const { return registered_; }
  const std::map<std::string, AuthorityEntry>& authorities() const { return authorities_; }
  const std::map<std::string, std::vector<CertifierEntry>>& certifications() const {
    return certifications_;
  }
  const std::map<std::string, MessageEntry>& messages() const { return messages_; }
  std::uint64_t next_index() const { return next_index_; }

  bool all_committed() const;
  bool operator==(const ContractState&) const = default;

  static ContractState replay(const std::vector<LedgerRecord>& records);

 private:
  void apply_authority(const LedgerRecord& r);
  void apply_certifier(const LedgerRecord& r);
  void apply_message(const LedgerRecord& r);

  std::vector<std::string> registered_;
  std::map<std::string, AuthorityEntry> authorities_;
  std::map<std::string, std::vector<CertifierEntry>> certifications_;
  std::map<std::string, MessageEntry> messages_;
  std::uint64_t next_index_ = 0;
};

/// Persistence for the record log. `lock` serializes writers (across
/// processes for the file backend); `read_from` returns records with
/// tx_index >= `index` in order.
class LogStore {
 public:
  virtual ~LogStore() = default;
  virtual void lock() = 0;
  virtual void unlock() = 0;
  virtual std::vector<LedgerRecord> read_from(std::uint64_t index) = 0;
  virtual void write(const LedgerRecord& record) = 0;
};

class MemoryLog final : public LogStore {
 public:
  void lock() override { writer_.lock(); }
  void unlock() override { writer_.unlock(); }
  std::vector<LedgerRecord> read_from(std::uint64_t index) override;
  void write(const LedgerRecord& record) override;

 private:
  std::mutex writer_;
  std::mutex data_;
  std::vector<LedgerRecord> records_;
};

/// Newline-delimited records in one file, guarded by flock(2).
class FileLog final : public LogStore {
 public:
  explicit FileLog(std::filesystem::path path);
  ~FileLog() override;
  FileLog(const FileLog&) = delete;
  FileLog& operator=(const FileLog&) = delete;

  void lock() override;
  void unlock() override;
  std::vector<LedgerRecord> read_from(std::uint64_t index) override;
  void write(const LedgerRecord& record) override;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  int fd_ = -1;
  std::mutex writer_;
  // Complete lines already parsed and the byte offset just past them.
  std::mutex cache_mu_;
  std::vector<LedgerRecord> cache_;
  long long cache_offset_ = 0;
};

/// Typed contract front-end. Thread-safe; each call first catches up with
/// records appended by other processes sharing the log.
class Ledger {
 public:
  explicit Ledger(std::unique_ptr<LogStore> log);
  static std::unique_ptr<Ledger> in_memory();
  static std::unique_ptr<Ledger> open(const std::filesystem::path& path);

  /// Consulted by certifier_set when set; unresolvable locators are refused.
  void set_resolver(std::function<bool(const Rloc&)> resolver);

  /// Generic primitive; validates through ContractState. Throws BadAddress
  /// plus whatever the contract rejects.
  std::uint64_t append(const std::string& sender, Contract contract, std::string_view action,
                       ByteView payload);

  // Authority contract. `authorities` on metadata posts is the ordered
  // authority list the poster agreed to; the first post fixes the set.
  std::uint64_t authority_post_metadata(const std::string& sender, const std::string& authority_id,
                                        const Rloc& metadata_rloc,
                                        const std::vector<std::string>& authorities);
  std::uint64_t authority_post_commitment(const std::string& sender,
                                          const std::string& authority_id,
                                          const crypto::Commitment& commitment);
  std::uint64_t authority_post_opening(const std::string& sender, const std::string& authority_id,
                                       const Rloc& opening_rloc);
  std::uint64_t authority_post_public_key(const std::string& sender,
                                          const std::string& authority_id, const Rloc& rloc);
  std::uint64_t authority_post_params(const std::string& sender, const std::string& authority_id,
                                      const Rloc& rloc);
  std::optional<AuthorityEntry> authority_get(const std::string& authority_id);
  std::vector<std::string> registered_authorities();

  // Attribute-certifier contract.
  std::uint64_t certifier_set(const std::string& reader_address, const Rloc& attributes_rloc,
                              const std::string& certifier_address);
  std::vector<CertifierEntry> certifier_get(const std::string& reader_address);

  // Message contract.
  std::uint64_t message_announce(const std::string& sender, const std::string& message_id,
                                 const Rloc& envelope_rloc);
  /// Throws BadMessageId, NotFound.
  MessageEntry message_get(const std::string& message_id);
  bool message_exists(const std::string& message_id);

  std::vector<LedgerRecord> records();
  ContractState state();

 private:
  void sync_locked();

  std::unique_ptr<LogStore> log_;
  std::mutex mu_;
  std::vector<LedgerRecord> records_;
  ContractState state_;
  std::function<bool(const Rloc&)> resolver_;
};

}  // namespace martsia::ledger
