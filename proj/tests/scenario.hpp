#pragma once

// The supply-chain running example as a live deployment: four authorities
// run the ceremony and serve key requests over TCP, a certifier attests the
// seven actors, and the three corpus messages can be sent and read.

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "martsia/authority/issuer.hpp"
#include "martsia/authority/server.hpp"
#include "martsia/client/client.hpp"

namespace martsia::testing {

struct Actor {
  std::string name;
  std::vector<std::string> attributes;
  client::ActorProfile profile;
};

/// One slice of the corpus with the actors the recipients column lists,
/// sender included.
struct ExpectedSlice {
  std::string message;  // corpus file stem
  std::size_t index;
  std::vector<std::string> readers;
};

inline constexpr const char* kCaseId = "43175279";

/// Corpus files in sending order, with their senders.
const std::vector<std::pair<std::string, std::string>>& corpus_messages();
/// The recipients matrix, sender included.
const std::vector<ExpectedSlice>& expected_matrix();
std::vector<envelope::SliceSpec> load_corpus(const std::string& stem);
/// Every field name and value in the corpus.
std::vector<std::string> corpus_strings();

class Scenario {
 public:
  /// Ledger log and datastore live under `root` so separate processes can
  /// audit them.
  explicit Scenario(const std::filesystem::path& root);
  ~Scenario();

  ledger::Ledger& ledger() { return *ledger_; }
  store::DirectoryStore& store() { return *store_; }
  client::Deployment deployment() { return {*ledger_, *store_}; }
  const std::filesystem::path& ledger_path() const { return ledger_path_; }
  const std::filesystem::path& store_root() const { return store_root_; }

  const std::vector<Actor>& actors() const { return actors_; }
  const Actor& actor(const std::string& name) const;
  const client::ActorProfile& certifier() const { return *certifier_; }
  const std::vector<std::string>& authority_ids() const { return authority_ids_; }

  void stop_authority(const std::string& id);

  /// Shares from every reachable authority, cached per actor.
  const crypto::FullDecryptionKey& fdk(const std::string& actor_name);

  /// Sends a corpus message from its listed sender.
  client::SendReceipt send(const std::string& stem, Rng& rng);

 private:
  std::filesystem::path ledger_path_, store_root_;
  std::unique_ptr<ledger::Ledger> ledger_;
  std::unique_ptr<store::DirectoryStore> store_;
  std::vector<std::string> authority_ids_;
  std::map<std::string, std::unique_ptr<authority::KeyIssuer>> issuers_;
  std::map<std::string, std::unique_ptr<authority::AuthorityServer>> servers_;
  std::vector<Actor> actors_;
  std::unique_ptr<client::ActorProfile> certifier_;
  std::map<std::string, crypto::FullDecryptionKey> fdks_;
};

}  // namespace martsia::testing
