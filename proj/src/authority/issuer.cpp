#include "martsia/authority/issuer.hpp"

#include <set>

#include "martsia/authority/attestation.hpp"
#include "martsia/error.hpp"
#include "martsia/policy/ast.hpp"

namespace martsia::authority {

KeyIssuer::KeyIssuer(std::string authority_id, ledger::Ledger& ledger,
                     const store::DataStore& store, IssuerOptions options)
    : authority_id_(std::move(authority_id)), ledger_(ledger), store_(store), options_(options) {}

void KeyIssuer::ready(crypto::PublicParameters params, crypto::AuthorityKeypair keypair) {
  if (keypair.authority_id != authority_id_) {
    fail(Errc::InvalidArgument, "keypair belongs to " + keypair.authority_id, keypair.authority_id);
  }
  std::lock_guard lock(mu_);
  params_ = std::move(params);
  keypair_ = std::move(keypair);
}

bool KeyIssuer::is_ready() const {
  std::lock_guard lock(mu_);
  return params_.has_value();
}

std::size_t KeyIssuer::open_sessions() const {
  std::lock_guard lock(mu_);
  return sessions_.size();
}

void KeyIssuer::expire_locked() {
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    if (clock_ - it->second.issued_at > options_.session_ttl) {
      it = sessions_.erase(it);
    } else {
      ++it;
    }
  }
}

Hello KeyIssuer::handle_hello(const std::string& reader_address) {
  if (!ledger::is_address(reader_address)) {
    fail(Errc::BadAddress, "malformed reader address '" + reader_address + "'", reader_address);
  }
  SystemRng rng;
  std::lock_guard lock(mu_);
  if (!params_) fail(Errc::ServerNotReady, "authority " + authority_id_ + " has no parameters yet");
  ++clock_;
  expire_locked();
  Hello hello;
  do {
    hello.session_id = rng.draw<16>();
  } while (sessions_.count(hello.session_id));
  hello.challenge = rng.draw<32>();
  sessions_.emplace(hello.session_id,
                    Session{reader_address, hello.challenge, State::ChallengeSent, clock_});
  return hello;
}

std::vector<crypto::KeyShare> KeyIssuer::handle_auth(const SessionId& session_id,
                                                     ByteView signature) {
  Session session;
  crypto::PublicParameters params;
  crypto::AuthorityKeypair keypair;
  {
    std::lock_guard lock(mu_);
    if (!params_) fail(Errc::ServerNotReady, "authority " + authority_id_ + " has no parameters yet");
    ++clock_;
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) fail(Errc::UnknownSession, "unknown session");
    if (clock_ - it->second.issued_at > options_.session_ttl) {
      sessions_.erase(it);
      fail(Errc::SessionExpired, "session expired");
    }
    if (it->second.state == State::Closed) {
      fail(Errc::ReplayDetected, "session already used", it->second.reader_address);
    }
    it->second.state = State::Closed;  // single use, whatever happens next
    session = it->second;
    params = *params_;
    keypair = *keypair_;
  }

  // Everything below is read-only on shared state and runs unlocked.
  const auto& reader = session.reader_address;
  auto entries = ledger_.certifier_get(reader);
  if (entries.empty()) fail(Errc::NoAttestations, "reader " + reader + " is not certified", reader);

  std::set<std::string> attributes;
  bool any_document = false;
  for (const auto& entry : entries) {
    std::optional<AttestationDocument> doc;
    try {
      doc = AttestationDocument::decode(to_string(store_.get(entry.attributes_rloc)));
    } catch (const Error&) {
      continue;  // unreadable attestations grant nothing
    }
    if (doc->reader_address != reader || doc->gid != reader) continue;
    any_document = true;
    if (!crypto::verify_challenge(doc->verify_key, session.challenge, signature)) continue;
    attributes.insert(doc->attributes.begin(), doc->attributes.end());
  }
  if (!any_document) fail(Errc::NoAttestations, "no readable attestation for " + reader, reader);
  if (attributes.empty()) {
    fail(Errc::SignatureInvalid, "signature does not match any attested key of " + reader, reader);
  }

  SystemRng rng;
  std::vector<crypto::KeyShare> shares;
  for (const auto& attr : attributes) {
    shares.push_back(crypto::keygen(params, keypair, reader, policy::namespaced(attr, authority_id_), rng));
  }
  return shares;
}

}  // namespace martsia::authority
