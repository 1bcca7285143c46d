#pragma once

// Commit-then-open parameter ceremony. Every authority commits to a random
// 32-byte seed, then reveals it; the XOR of all revealed seeds feeds
// global_setup. All coordination goes through the ledger and datastore, so
// any observer can recompute the outcome.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "martsia/crypto/abe.hpp"
#include "martsia/crypto/signature.hpp"
#include "martsia/ledger/ledger.hpp"
#include "martsia/store/datastore.hpp"

namespace martsia::ceremony {

struct AuthorityInfo {
  std::string authority_id;
  std::string endpoint;  // host:port of the key-issuance server
  crypto::VerifyKey verify_key;
};

/// Shared description of the authority network. Honest authorities encode
/// the same list to the same bytes, hence the same rloc.
struct MetadataDocument {
  std::vector<AuthorityInfo> authorities;  // agreed order

  /// `martsia-authorities/1` magic line, then key-sorted `k=v` lines.
  std::string encode() const;
  static MetadataDocument decode(std::string_view text);

  std::vector<std::string> ids() const;
  const AuthorityInfo* find(const std::string& authority_id) const;
};

enum class Phase { CollectingCommitments, CollectingOpenings, Finalized, Aborted };
std::string_view phase_name(Phase p);

struct CeremonyState {
  std::vector<std::string> authorities;
  Phase phase = Phase::CollectingCommitments;
  std::map<std::string, crypto::Commitment> commitments;
  std::map<std::string, crypto::Seed> openings;
  std::optional<crypto::PublicParameters> result;
  std::optional<std::string> offender;  // set when Aborted
};

crypto::Seed combine_seeds(std::span<const crypto::Seed> seeds);

/// Reads the ceremony off the ledger. Verification failures show up as
/// phase Aborted rather than exceptions.
CeremonyState observe(ledger::Ledger& ledger, const store::DataStore& store);

/// Observer finalize: verifies every opening against its commitment and
/// derives the parameters. Throws IncompleteOpenings, or CommitmentMismatch
/// with the offending authority id as detail.
crypto::PublicParameters finalize(ledger::Ledger& ledger, const store::DataStore& store);

/// One authority's side of the ceremony.
class Participant {
 public:
  Participant(std::string authority_id, std::string address, ledger::Ledger& ledger,
              store::DataStore& store);

  store::Rloc publish_metadata(const MetadataDocument& doc);

  /// Throws WrongPhase once openings have begun; DuplicateCommitment from
  /// the ledger on a second commit.
  crypto::Commitment commit_round(Rng& rng);
  /// Throws OpeningBeforeAllCommitments from the ledger.
  store::Rloc open_round();
  /// Observer finalize, then posts this authority's params rloc.
  crypto::PublicParameters finalize();

  struct PublishedKeys {
    store::Rloc rloc;
    crypto::AuthorityKeypair keypair;
  };
  /// Throws WrongPhase before the ceremony is finalized.
  PublishedKeys publish_keys(const crypto::PublicParameters& params, Rng& rng);

  /// The seed committed to; persisted by the caller between rounds.
  const std::optional<crypto::Seed>& seed() const { return seed_; }
  void restore_seed(const crypto::Seed& seed) { seed_ = seed; }

  const std::string& authority_id() const { return authority_id_; }
  const std::string& address() const { return address_; }

 private:
  std::string authority_id_;
  std::string address_;
  ledger::Ledger& ledger_;
  store::DataStore& store_;
  std::optional<crypto::Seed> seed_;
};

}  // namespace martsia::ceremony
