#include "martsia/ledger/ledger.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "martsia/error.hpp"

namespace martsia::ledger {

// ---- memory log -----------------------------------------------------------

std::vector<LedgerRecord> MemoryLog::read_from(std::uint64_t index) {
  std::lock_guard lock(data_);
  std::vector<LedgerRecord> out;
  for (std::size_t i = index; i < records_.size(); ++i) out.push_back(records_[i]);
  return out;
}

void MemoryLog::write(const LedgerRecord& record) {
  std::lock_guard lock(data_);
  records_.push_back(record);
}

// ---- file log -------------------------------------------------------------

FileLog::FileLog(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path_.parent_path(), ec);
  }
  fd_ = ::open(path_.c_str(), O_RDWR | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) {
    fail(Errc::IoError, "cannot open ledger log " + path_.string(), std::strerror(errno));
  }
}

FileLog::~FileLog() {
  if (fd_ >= 0) ::close(fd_);
}

void FileLog::lock() {
  writer_.lock();
  while (::flock(fd_, LOCK_EX) != 0) {
    if (errno != EINTR) {
      writer_.unlock();
      fail(Errc::IoError, "cannot lock ledger log", std::strerror(errno));
    }
  }
}

void FileLog::unlock() {
  ::flock(fd_, LOCK_UN);
  writer_.unlock();
}

std::vector<LedgerRecord> FileLog::read_from(std::uint64_t index) {
  std::lock_guard lock(cache_mu_);
  std::string text;
  char buf[1 << 16];
  ssize_t n;
  off_t offset = cache_offset_;
  while ((n = ::pread(fd_, buf, sizeof buf, offset)) > 0) {
    text.append(buf, static_cast<std::size_t>(n));
    offset += n;
  }
  if (n < 0) fail(Errc::IoError, "cannot read ledger log", std::strerror(errno));

  // A line without its newline is a write in progress; leave it for later.
  std::size_t pos = 0;
  while (true) {
    auto nl = text.find('\n', pos);
    if (nl == std::string::npos) break;
    cache_.push_back(LedgerRecord::decode(std::string_view(text).substr(pos, nl - pos)));
    pos = nl + 1;
  }
  cache_offset_ += static_cast<long long>(pos);
  if (index >= cache_.size()) return {};
  return {cache_.begin() + static_cast<std::ptrdiff_t>(index), cache_.end()};
}

void FileLog::write(const LedgerRecord& record) {
  // Called under the exclusive lock right after read_from, so anything past
  // the cached offset is the remnant of a writer that died mid-line.
  {
    std::lock_guard lock(cache_mu_);
    if (::ftruncate(fd_, cache_offset_) != 0) {
      fail(Errc::IoError, "cannot trim ledger log", std::strerror(errno));
    }
  }
  auto line = record.encode() + "\n";
  std::size_t done = 0;
  while (done < line.size()) {
    auto n = ::write(fd_, line.data() + done, line.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail(Errc::IoError, "cannot append to ledger log", std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
  if (::fsync(fd_) != 0) fail(Errc::IoError, "cannot sync ledger log", std::strerror(errno));
}

// ---- ledger ---------------------------------------------------------------

namespace {

class LogGuard {
 public:
  explicit LogGuard(LogStore& log) : log_(log) { log_.lock(); }
  ~LogGuard() { log_.unlock(); }
  LogGuard(const LogGuard&) = delete;
  LogGuard& operator=(const LogGuard&) = delete;

 private:
  LogStore& log_;
};

Bytes id_and_rloc(const std::string& id, const Rloc& rloc) {
  ByteWriter w;
  w.str(id).raw(rloc.digest.bytes);
  return std::move(w).take();
}

}  // namespace

Ledger::Ledger(std::unique_ptr<LogStore> log) : log_(std::move(log)) {
  std::lock_guard lock(mu_);
  sync_locked();
}

std::unique_ptr<Ledger> Ledger::in_memory() {
  return std::make_unique<Ledger>(std::make_unique<MemoryLog>());
}

std::unique_ptr<Ledger> Ledger::open(const std::filesystem::path& path) {
  return std::make_unique<Ledger>(std::make_unique<FileLog>(path));
}

void Ledger::set_resolver(std::function<bool(const Rloc&)> resolver) {
  std::lock_guard lock(mu_);
  resolver_ = std::move(resolver);
}

void Ledger::sync_locked() {
  for (auto& r : log_->read_from(records_.size())) {
    state_.apply(r);
    records_.push_back(std::move(r));
  }
}

std::uint64_t Ledger::append(const std::string& sender, Contract contract,
                             std::string_view action_name, ByteView payload) {
  if (!is_address(sender)) fail(Errc::BadAddress, "malformed sender address '" + sender + "'", sender);
  std::lock_guard lock(mu_);
  LogGuard guard(*log_);
  sync_locked();
  LedgerRecord rec;
  rec.tx_index = state_.next_index();
  rec.timestamp = rec.tx_index + 1;
  rec.sender = sender;
  rec.contract = contract;
  rec.action = std::string(action_name);
  rec.payload.assign(payload.begin(), payload.end());
  state_.apply(rec);  // throws without mutating on rejection
  log_->write(rec);
  records_.push_back(std::move(rec));
  return records_.back().tx_index;
}

std::uint64_t Ledger::authority_post_metadata(const std::string& sender,
                                              const std::string& authority_id,
                                              const Rloc& metadata_rloc,
                                              const std::vector<std::string>& authorities) {
  ByteWriter w;
  w.str(authority_id).raw(metadata_rloc.digest.bytes).u32(static_cast<std::uint32_t>(authorities.size()));
  for (const auto& a : authorities) w.str(a);
  return append(sender, Contract::Authority, action::kPostMetadata, w.data());
}

std::uint64_t Ledger::authority_post_commitment(const std::string& sender,
                                                const std::string& authority_id,
                                                const crypto::Commitment& commitment) {
  ByteWriter w;
  w.str(authority_id).raw(commitment.digest.bytes);
  return append(sender, Contract::Authority, action::kPostCommitment, w.data());
}

std::uint64_t Ledger::authority_post_opening(const std::string& sender,
                                             const std::string& authority_id,
                                             const Rloc& opening_rloc) {
  return append(sender, Contract::Authority, action::kPostOpening,
                id_and_rloc(authority_id, opening_rloc));
}

std::uint64_t Ledger::authority_post_public_key(const std::string& sender,
                                                const std::string& authority_id, const Rloc& rloc) {
  return append(sender, Contract::Authority, action::kPostPublicKey, id_and_rloc(authority_id, rloc));
}

std::uint64_t Ledger::authority_post_params(const std::string& sender,
                                            const std::string& authority_id, const Rloc& rloc) {
  return append(sender, Contract::Authority, action::kPostParams, id_and_rloc(authority_id, rloc));
}

std::optional<AuthorityEntry> Ledger::authority_get(const std::string& authority_id) {
  std::lock_guard lock(mu_);
  sync_locked();
  auto it = state_.authorities().find(authority_id);
  if (it == state_.authorities().end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> Ledger::registered_authorities() {
  std::lock_guard lock(mu_);
  sync_locked();
  return state_.registered_authorities();
}

std::uint64_t Ledger::certifier_set(const std::string& reader_address, const Rloc& attributes_rloc,
                                    const std::string& certifier_address) {
  std::function<bool(const Rloc&)> resolver;
  {
    std::lock_guard lock(mu_);
    resolver = resolver_;
  }
  if (resolver && !resolver(attributes_rloc)) {
    fail(Errc::UnresolvableRloc, "attestation " + attributes_rloc.text() + " is not in the datastore",
         attributes_rloc.text());
  }
  return append(certifier_address, Contract::Certifier, action::kCertifierSet,
                id_and_rloc(reader_address, attributes_rloc));
}

std::vector<CertifierEntry> Ledger::certifier_get(const std::string& reader_address) {
  std::lock_guard lock(mu_);
  sync_locked();
  auto it = state_.certifications().find(reader_address);
  if (it == state_.certifications().end()) return {};
  return it->second;
}

std::uint64_t Ledger::message_announce(const std::string& sender, const std::string& message_id,
                                       const Rloc& envelope_rloc) {
  return append(sender, Contract::Message, action::kAnnounce, id_and_rloc(message_id, envelope_rloc));
}

MessageEntry Ledger::message_get(const std::string& message_id) {
  if (!is_message_id(message_id)) {
    fail(Errc::BadMessageId, "message id must be 8 decimal digits", message_id);
  }
  std::lock_guard lock(mu_);
  sync_locked();
  auto it = state_.messages().find(message_id);
  if (it == state_.messages().end()) {
    fail(Errc::NotFound, "no message " + message_id + " on the ledger", message_id);
  }
  return it->second;
}

bool Ledger::message_exists(const std::string& message_id) {
  std::lock_guard lock(mu_);
  sync_locked();
  return state_.messages().count(message_id) != 0;
}

std::vector<LedgerRecord> Ledger::records() {
  std::lock_guard lock(mu_);
  sync_locked();
  return records_;
}

ContractState Ledger::state() {
  std::lock_guard lock(mu_);
  sync_locked();
  return state_;
}

}  // namespace martsia::ledger
