#include <set>
#include <sstream>

#include "martsia/authority/attestation.hpp"
#include "martsia/client/client.hpp"
#include "martsia/error.hpp"

namespace martsia::client {

std::string AuditReport::to_text() const {
  std::ostringstream out;
  out << "objects_checked=" << objects_checked << "\n";
  out << "ok=" << (ok() ? "true" : "false") << "\n";
  out << "problems=" << problems.size() << "\n";
  for (std::size_t i = 0; i < problems.size(); ++i) out << "problem." << i << "=" << problems[i] << "\n";
  out << "records=" << records << "\n";
  out << "references_checked=" << references_checked << "\n";
  return out.str();
}

AuditReport audit(Deployment dep) {
  AuditReport report;
  auto problem = [&](std::string what) { report.problems.push_back(std::move(what)); };

  // 1. The log replays to the state the ledger reports.
  auto records = dep.ledger.records();
  report.records = records.size();
  auto live = dep.ledger.state();
  try {
    if (!(ledger::ContractState::replay(records) == live)) problem("replayed state differs from live state");
  } catch (const Error& e) {
    problem(std::string("log does not replay: ") + e.what());
  }

  // 2. Every stored object still hashes to its locator.
  for (const auto& rloc : dep.store.list()) {
    ++report.objects_checked;
    try {
      dep.store.get(rloc);
    } catch (const Error& e) {
      problem("object " + rloc.text() + ": " + e.what());
    }
  }

  // 3. Every locator on the ledger resolves to an artifact of the right kind.
  auto check = [&](const store::Rloc& rloc, const std::string& what, auto&& decode) {
    ++report.references_checked;
    try {
      decode(dep.store.get(rloc));
    } catch (const Error& e) {
      problem(what + " " + rloc.text() + ": " + e.what());
    }
  };
  for (const auto& [id, e] : live.authorities()) {
    if (e.metadata_rloc) {
      check(*e.metadata_rloc, "metadata of " + id,
            [](const Bytes& b) { ceremony::MetadataDocument::decode(to_string(b)); });
    }
    if (e.opening_rloc) {
      check(*e.opening_rloc, "opening of " + id, [&](const Bytes& b) {
        if (b.size() != 32 || !e.commitment || !crypto::open(*e.commitment, b)) {
          fail(Errc::CommitmentMismatch, "does not open the commitment", id);
        }
      });
    }
    if (e.params_rloc) {
      check(*e.params_rloc, "params of " + id, [](const Bytes& b) { crypto::PublicParameters::deserialize(b); });
    }
    if (e.public_key_rloc) {
      check(*e.public_key_rloc, "public key of " + id, [&](const Bytes& b) {
        if (crypto::AuthorityPublicKey::deserialize(b).authority_id != id) {
          fail(Errc::Malformed, "names another authority");
        }
      });
    }
  }
  for (const auto& [reader, entries] : live.certifications()) {
    for (const auto& c : entries) {
      check(c.attributes_rloc, "attestation for " + reader, [&](const Bytes& b) {
        auto doc = authority::AttestationDocument::decode(to_string(b));
        if (doc.reader_address != reader) fail(Errc::Malformed, "attests another reader");
      });
    }
  }
  for (const auto& [id, m] : live.messages()) {
    check(m.envelope_rloc, "envelope of message " + id, [&](const Bytes& b) {
      auto env = envelope::MessageEnvelope::parse(to_string(b));
      if (env.metadata.message_id != id || env.metadata.sender_address != m.sender_address) {
        fail(Errc::IntegrityFailure, "metadata disagrees with the announcement");
      }
    });
  }

  // 4. The ceremony outcome and the authorities' agreement, recomputed.
  if (!live.registered_authorities().empty()) {
    auto state = ceremony::observe(dep.ledger, dep.store);
    if (state.phase == ceremony::Phase::Aborted) {
      problem("ceremony aborted: opening of " + state.offender.value_or("?") + " does not match");
    } else if (state.phase != ceremony::Phase::Finalized) {
      problem(std::string("ceremony is ") + std::string(ceremony::phase_name(state.phase)));
    }
    auto consistency = verify_authority_consistency(dep);
    if (!consistency.consistent()) {
      std::istringstream lines(consistency.to_text());
      std::string line;
      std::string summary;
      while (std::getline(lines, line)) {
        if (line.find(".agree=false") != std::string::npos || line.rfind("problems=", 0) == 0 ||
            line.rfind("public_keys.missing=", 0) == 0) {
          if (line.back() != '=') summary += (summary.empty() ? "" : "; ") + line;
        }
      }
      problem("authority artifacts inconsistent: " + summary);
    }
  }
  return report;
}

}  // namespace martsia::client
