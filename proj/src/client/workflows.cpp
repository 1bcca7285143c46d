#include <algorithm>
#include <map>
#include <sstream>

#include "martsia/authority/attestation.hpp"
#include "martsia/authority/wire.hpp"
#include "martsia/client/client.hpp"
#include "martsia/error.hpp"
#include "martsia/policy/ast.hpp"

namespace martsia::client {

std::uint64_t certify_reader(const ActorProfile& certifier, Deployment dep,
                             const std::string& reader_address, const std::string& gid,
                             const std::vector<std::string>& attributes,
                             const crypto::VerifyKey& reader_verify_key) {
  if (!ledger::is_address(reader_address)) {
    fail(Errc::BadAddress, "malformed reader address '" + reader_address + "'", reader_address);
  }
  if (gid != reader_address) {
    fail(Errc::InvalidArgument, "the gid of a reader is its address", gid);
  }
  for (const auto& a : attributes) {
    if (!policy::is_attribute_name(a)) fail(Errc::InvalidArgument, "invalid attribute '" + a + "'", a);
  }
  authority::AttestationDocument doc{reader_address, gid, attributes, reader_verify_key};
  auto rloc = dep.store.put(as_bytes(doc.encode()));
  return dep.ledger.certifier_set(reader_address, rloc, certifier.address);
}

// ---- consistency ----------------------------------------------------------

namespace {

ArtifactAgreement agreement(const std::vector<std::string>& ids,
                            const std::map<std::string, ledger::AuthorityEntry>& entries,
                            std::optional<store::Rloc> ledger::AuthorityEntry::*field) {
  ArtifactAgreement out;
  std::map<store::Rloc, std::size_t> votes;
  for (const auto& id : ids) {
    auto it = entries.find(id);
    if (it == entries.end() || !(it->second.*field)) {
      out.missing.push_back(id);
    } else {
      ++votes[*(it->second.*field)];
    }
  }
  // Majority wins; ties go to the earliest authority in the agreed order.
  std::size_t best = 0;
  for (const auto& id : ids) {
    auto it = entries.find(id);
    if (it == entries.end() || !(it->second.*field)) continue;
    auto n = votes[*(it->second.*field)];
    if (n > best) {
      best = n;
      out.majority = *(it->second.*field);
    }
  }
  for (const auto& id : ids) {
    auto it = entries.find(id);
    if (it == entries.end() || !(it->second.*field)) continue;
    if (*(it->second.*field) != *out.majority) out.divergent.push_back(id);
  }
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ",") + s;
  return out;
}

}  // namespace

bool ConsistencyReport::consistent() const {
  return metadata.agree() && params.agree() && missing_public_keys.empty() && problems.empty();
}

std::string ConsistencyReport::to_text() const {
  std::ostringstream out;
  auto line = [&](const char* name, const ArtifactAgreement& a) {
    out << name << ".agree=" << (a.agree() ? "true" : "false") << "\n";
    out << name << ".divergent=" << join(a.divergent) << "\n";
    out << name << ".majority=" << (a.majority ? a.majority->text() : "") << "\n";
    out << name << ".missing=" << join(a.missing) << "\n";
  };
  out << "authorities=" << join(authorities) << "\n";
  out << "consistent=" << (consistent() ? "true" : "false") << "\n";
  line("metadata", metadata);
  line("params", params);
  out << "problems=" << join(problems) << "\n";
  out << "public_keys.missing=" << join(missing_public_keys) << "\n";
  return out.str();
}

ConsistencyReport verify_authority_consistency(Deployment dep) {
  auto state = dep.ledger.state();
  ConsistencyReport r;
  r.authorities = state.registered_authorities();
  if (r.authorities.empty()) fail(Errc::MissingArtifacts, "no authority metadata on the ledger");
  const auto& entries = state.authorities();
  r.metadata = agreement(r.authorities, entries, &ledger::AuthorityEntry::metadata_rloc);
  r.params = agreement(r.authorities, entries, &ledger::AuthorityEntry::params_rloc);

  if (r.metadata.majority) {
    try {
      auto doc = ceremony::MetadataDocument::decode(to_string(dep.store.get(*r.metadata.majority)));
      if (doc.ids() != r.authorities) {
        r.problems.push_back("metadata lists authorities " + join(doc.ids()) +
                             " but the ledger registered " + join(r.authorities));
      }
    } catch (const Error& e) {
      r.problems.push_back(std::string("metadata: ") + e.what());
    }
  }
  if (r.params.majority) {
    try {
      auto posted = crypto::PublicParameters::deserialize(dep.store.get(*r.params.majority));
      if (!(posted == ceremony::finalize(dep.ledger, dep.store))) {
        r.problems.push_back("posted parameters differ from the ceremony outcome");
      }
    } catch (const Error& e) {
      r.problems.push_back(std::string("params: ") + e.what());
    }
  }
  for (const auto& id : r.authorities) {
    auto it = entries.find(id);
    if (it == entries.end() || !it->second.public_key_rloc) {
      r.missing_public_keys.push_back(id);
      continue;
    }
    try {
      auto pk = crypto::AuthorityPublicKey::deserialize(dep.store.get(*it->second.public_key_rloc));
      if (pk.authority_id != id) r.problems.push_back("public key of " + id + " names " + pk.authority_id);
    } catch (const Error& e) {
      r.problems.push_back("public key of " + id + ": " + e.what());
    }
  }
  return r;
}

PublicMaterial load_public_material(Deployment dep) {
  auto report = verify_authority_consistency(dep);
  if (!report.consistent()) {
    fail(Errc::ConsistencyCheckFailed, "authority artifacts disagree:\n" + report.to_text());
  }
  PublicMaterial m{crypto::PublicParameters::deserialize(dep.store.get(*report.params.majority)), {},
                   ceremony::MetadataDocument::decode(to_string(dep.store.get(*report.metadata.majority)))};
  for (const auto& id : report.authorities) {
    auto entry = dep.ledger.authority_get(id);
    m.public_keys.emplace(id, crypto::AuthorityPublicKey::deserialize(dep.store.get(*entry->public_key_rloc)));
  }
  return m;
}

// ---- owner ----------------------------------------------------------------

SendReceipt send_message(const ActorProfile& owner, Deployment dep, const std::string& case_id,
                         const std::vector<envelope::SliceSpec>& slices, Rng& rng) {
  auto material = load_public_material(dep);
  constexpr int kAttempts = 64;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    auto id = envelope::random_id8(rng);
    if (dep.ledger.message_exists(id)) continue;
    // The id is bound into every slice, so a retry reseals from scratch.
    envelope::MessageMetadata meta{owner.address, case_id, id};
    auto env = envelope::seal_message(meta, slices, material.params, material.public_keys, rng);
    auto rloc = dep.store.put(as_bytes(env.serialize()));
    try {
      return {id, rloc, dep.ledger.message_announce(owner.address, id, rloc)};
    } catch (const Error& e) {
      if (e.code() != Errc::DuplicateMessageId) throw;  // lost a race; draw again
    }
  }
  fail(Errc::DuplicateMessageId, "no free message id after repeated attempts");
}

// ---- reader ---------------------------------------------------------------

KeyRequestResult request_keys(const ActorProfile& reader, Deployment dep,
                              const std::map<std::string, std::string>& endpoint_overrides,
                              int timeout_ms) {
  auto material = load_public_material(dep);
  KeyRequestResult out;
  std::vector<crypto::KeyShare> accepted;
  std::size_t refused_signature = 0, reached = 0;
  for (const auto& info : material.metadata.authorities) {
    const auto& id = info.authority_id;
    auto ov = endpoint_overrides.find(id);
    const auto& endpoint = ov != endpoint_overrides.end() ? ov->second : info.endpoint;
    std::vector<crypto::KeyShare> shares;
    try {
      shares = authority::request_shares(endpoint, reader.address, reader.signing_key, timeout_ms);
      ++reached;
    } catch (const Error& e) {
      if (e.code() != Errc::NetworkError) ++reached;
      if (e.code() == Errc::SignatureInvalid) ++refused_signature;
      out.warnings.push_back(id + " (" + endpoint + "): " + std::string(errc_name(e.code())) + ": " + e.what());
      continue;
    }
    std::size_t kept = 0;
    const auto& pk = material.public_keys.at(id);
    for (auto& s : shares) {
      auto [attr, auth] = policy::split_namespaced(s.attribute);
      if (s.gid != reader.address || s.authority_id != id || auth != id ||
          !crypto::verify_share(material.params, pk, s)) {
        out.warnings.push_back(id + ": discarded an invalid share for " + s.attribute);
        continue;
      }
      accepted.push_back(std::move(s));
      ++kept;
    }
    out.shares_per_authority[id] = kept;
    if (kept == 0 && shares.empty()) out.warnings.push_back(id + ": issued no shares");
  }
  if (accepted.empty()) {
    if (reached > 0 && refused_signature == reached) {
      fail(Errc::SignatureRejected, "every authority rejected the reader's signature", reader.address);
    }
    std::string detail;
    for (const auto& w : out.warnings) detail += "\n  " + w;
    fail(Errc::NoSharesObtained, "no authority issued key shares:" + detail, reader.address);
  }
  out.fdk = crypto::merge_shares(accepted);
  return out;
}

std::vector<envelope::SliceResult> read_message(const ActorProfile& reader, Deployment dep,
                                                const std::string& message_id,
                                                const crypto::FullDecryptionKey& fdk) {
  if (fdk.gid != reader.address) {
    fail(Errc::InvalidArgument, "decryption key belongs to " + fdk.gid, fdk.gid);
  }
  auto entry = dep.ledger.message_get(message_id);
  auto bytes = dep.store.get(entry.envelope_rloc);  // hash-verified
  auto env = envelope::MessageEnvelope::parse(to_string(bytes));
  if (env.metadata.message_id != entry.message_id ||
      env.metadata.sender_address != entry.sender_address) {
    fail(Errc::IntegrityFailure, "envelope metadata disagrees with its announcement", message_id);
  }
  auto material = load_public_material(dep);
  return envelope::open_message(env, material.params, fdk);
}

ledger::MessageEntry find_message_by_rloc(Deployment dep, const store::Rloc& rloc) {
  auto state = dep.ledger.state();
  for (const auto& [id, entry] : state.messages()) {
    if (entry.envelope_rloc == rloc) return entry;
  }
  fail(Errc::NotFound, "no message announced with " + rloc.text(), rloc.text());
}

}  // namespace martsia::client
