#pragma once

// Server-side key issuance: challenge-response authentication of a reader,
// attestation lookup through the ledger, and key-share generation.

#include <array>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "martsia/crypto/abe.hpp"
#include "martsia/crypto/signature.hpp"
#include "martsia/ledger/ledger.hpp"
#include "martsia/store/datastore.hpp"

namespace martsia::authority {

using SessionId = std::array<std::uint8_t, 16>;

struct Hello {
  SessionId session_id;
  crypto::Challenge challenge;
};

struct IssuerOptions {
  /// Sessions expire this many protocol events after the hello.
  std::uint64_t session_ttl = 1000;
};

class KeyIssuer {
 public:
  KeyIssuer(std::string authority_id, ledger::Ledger& ledger, const store::DataStore& store,
            IssuerOptions options = {});

  /// Loads finalized parameters and this authority's keypair.
  void ready(crypto::PublicParameters params, crypto::AuthorityKeypair keypair);
  bool is_ready() const;

  /// Throws ServerNotReady, BadAddress.
  Hello handle_hello(const std::string& reader_address);

  /// Closes the session whatever the outcome. Throws UnknownSession,
  /// SessionExpired, ReplayDetected, NoAttestations, SignatureInvalid.
  std::vector<crypto::KeyShare> handle_auth(const SessionId& session_id, ByteView signature);

  const std::string& authority_id() const { return authority_id_; }
  std::size_t open_sessions() const;

 private:
  enum class State { ChallengeSent, Closed };
  struct Session {
    std::string reader_address;
    crypto::Challenge challenge;
    State state;
    std::uint64_t issued_at;
  };

  void expire_locked();

  std::string authority_id_;
  ledger::Ledger& ledger_;
  const store::DataStore& store_;
  IssuerOptions options_;

  mutable std::mutex mu_;
  std::optional<crypto::PublicParameters> params_;
  std::optional<crypto::AuthorityKeypair> keypair_;
  std::map<SessionId, Session> sessions_;
  std::uint64_t clock_ = 0;
};

}  // namespace martsia::authority
