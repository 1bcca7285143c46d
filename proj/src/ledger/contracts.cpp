#include <algorithm>
#include <set>

#include "martsia/error.hpp"
#include "martsia/ledger/ledger.hpp"

namespace martsia::ledger {

namespace {

Rloc read_rloc(ByteReader& r) { return Rloc{crypto::Digest{r.fixed<32>()}}; }

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

bool ContractState::all_committed() const {
  if (registered_.empty()) return false;
  return std::all_of(registered_.begin(), registered_.end(), [&](const std::string& id) {
    auto it = authorities_.find(id);
    return it != authorities_.end() && it->second.commitment.has_value();
  });
}

void ContractState::apply(const LedgerRecord& record) {
  if (record.tx_index != next_index_ || record.timestamp != record.tx_index + 1) {
    fail(Errc::Malformed, "record " + std::to_string(record.tx_index) +
                              " out of sequence (expected " + std::to_string(next_index_) + ")");
  }
  if (!is_address(record.sender)) {
    fail(Errc::BadAddress, "malformed sender address '" + record.sender + "'", record.sender);
  }
  switch (record.contract) {
    case Contract::Authority: apply_authority(record); break;
    case Contract::Certifier: apply_certifier(record); break;
    case Contract::Message: apply_message(record); break;
  }
  ++next_index_;
}

void ContractState::apply_authority(const LedgerRecord& rec) {
  ByteReader r(rec.payload);
  auto id = r.str();

  auto require_registered = [&] {
    if (!contains(registered_, id)) {
      fail(Errc::UnknownAuthority, "authority " + id + " is not registered", id);
    }
    auto it = authorities_.find(id);
    if (it != authorities_.end() && !it->second.sender.empty() && it->second.sender != rec.sender) {
      fail(Errc::UnknownAuthority, rec.sender + " does not act for authority " + id, id);
    }
  };
  auto entry_for = [&]() -> AuthorityEntry& {
    auto& e = authorities_[id];
    e.authority_id = id;
    if (e.sender.empty()) e.sender = rec.sender;
    return e;
  };

  if (rec.action == action::kPostMetadata) {
    auto rloc = read_rloc(r);
    auto n = r.u32();
    if (n == 0 || n > r.remaining()) fail(Errc::Malformed, "bad authority list in metadata post");
    std::vector<std::string> ids;
    for (std::uint32_t i = 0; i < n; ++i) ids.push_back(r.str());
    r.expect_end();
    std::set<std::string> unique(ids.begin(), ids.end());
    if (unique.size() != ids.size() || !unique.count(id)) {
      fail(Errc::InvalidArgument, "metadata authority list must be distinct and include " + id);
    }
    if (registered_.empty()) {
      registered_ = ids;
    } else {
      require_registered();
      if (authorities_.count(id) && authorities_.at(id).metadata_rloc) {
        fail(Errc::DuplicateEntry, "authority " + id + " already posted metadata", id);
      }
    }
    entry_for().metadata_rloc = rloc;
    return;
  }

  if (rec.action == action::kPostCommitment) {
    crypto::Commitment c{crypto::Digest{r.fixed<32>()}};
    r.expect_end();
    require_registered();
    auto it = authorities_.find(id);
    if (it != authorities_.end() && it->second.commitment) {
      fail(Errc::DuplicateCommitment, "authority " + id + " already committed", id);
    }
    entry_for().commitment = c;
    return;
  }

  auto rloc = read_rloc(r);
  r.expect_end();
  require_registered();
  auto existing = authorities_.find(id);
  auto duplicate = [&](const std::optional<Rloc> AuthorityEntry::*field, const char* what) {
    if (existing != authorities_.end() && (existing->second.*field).has_value()) {
      fail(Errc::DuplicateEntry, "authority " + id + " already posted its " + what, id);
    }
  };

  if (rec.action == action::kPostOpening) {
    if (!all_committed()) {
      fail(Errc::OpeningBeforeAllCommitments,
           "opening from " + id + " before every authority committed", id);
    }
    duplicate(&AuthorityEntry::opening_rloc, "opening");
    entry_for().opening_rloc = rloc;
  } else if (rec.action == action::kPostPublicKey) {
    duplicate(&AuthorityEntry::public_key_rloc, "public key");
    entry_for().public_key_rloc = rloc;
  } else if (rec.action == action::kPostParams) {
    duplicate(&AuthorityEntry::params_rloc, "parameters");
    entry_for().params_rloc = rloc;
  } else {
    fail(Errc::InvalidArgument, "unknown Authority action '" + rec.action + "'");
  }
}

void ContractState::apply_certifier(const LedgerRecord& rec) {
  if (rec.action != action::kCertifierSet) {
    fail(Errc::InvalidArgument, "unknown Certifier action '" + rec.action + "'");
  }
  ByteReader r(rec.payload);
  CertifierEntry e;
  e.reader_address = r.str();
  e.attributes_rloc = read_rloc(r);
  r.expect_end();
  if (!is_address(e.reader_address)) {
    fail(Errc::BadAddress, "malformed reader address '" + e.reader_address + "'", e.reader_address);
  }
  e.certifier_address = rec.sender;
  e.tx_index = rec.tx_index;
  certifications_[e.reader_address].push_back(std::move(e));
}

void ContractState::apply_message(const LedgerRecord& rec) {
  if (rec.action != action::kAnnounce) {
    fail(Errc::InvalidArgument, "unknown Message action '" + rec.action + "'");
  }
  ByteReader r(rec.payload);
  MessageEntry e;
  e.message_id = r.str();
  e.envelope_rloc = read_rloc(r);
  r.expect_end();
  if (!is_message_id(e.message_id)) {
    fail(Errc::BadMessageId, "message id must be 8 decimal digits", e.message_id);
  }
  if (messages_.count(e.message_id)) {
    fail(Errc::DuplicateMessageId, "message id " + e.message_id + " already announced",
         e.message_id);
  }
  e.sender_address = rec.sender;
  e.tx_index = rec.tx_index;
  messages_.emplace(e.message_id, std::move(e));
}

ContractState ContractState::replay(const std::vector<LedgerRecord>& records) {
  ContractState s;
  for (const auto& r : records) s.apply(r);
  return s;
}

}  // namespace martsia::ledger
