#include "martsia/ceremony/ceremony.hpp"

#include "martsia/error.hpp"

namespace martsia::ceremony {

std::string_view phase_name(Phase p) {
  switch (p) {
    case Phase::CollectingCommitments: return "CollectingCommitments";
    case Phase::CollectingOpenings: return "CollectingOpenings";
    case Phase::Finalized: return "Finalized";
    case Phase::Aborted: return "Aborted";
  }
  return "?";
}

crypto::Seed combine_seeds(std::span<const crypto::Seed> seeds) {
  crypto::Seed out{};
  for (const auto& s : seeds) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] ^= s[i];
  }
  return out;
}

namespace {

// Fetches and checks one opening; throws CommitmentMismatch naming `id`.
crypto::Seed verified_opening(const store::DataStore& store, const std::string& id,
                              const ledger::AuthorityEntry& entry) {
  Bytes bytes;
  try {
    bytes = store.get(*entry.opening_rloc);
  } catch (const Error& e) {
    fail(Errc::CommitmentMismatch, "opening of " + id + " unavailable: " + e.what(), id);
  }
  if (bytes.size() != crypto::Seed{}.size() || !crypto::open(*entry.commitment, bytes)) {
    fail(Errc::CommitmentMismatch, "opening of " + id + " does not match its commitment", id);
  }
  crypto::Seed seed{};
  std::copy(bytes.begin(), bytes.end(), seed.begin());
  return seed;
}

}  // namespace

crypto::PublicParameters finalize(ledger::Ledger& ledger, const store::DataStore& store) {
  auto state = ledger.state();
  const auto& ids = state.registered_authorities();
  if (ids.empty()) fail(Errc::IncompleteOpenings, "no authorities registered");
  std::vector<crypto::Seed> seeds;
  for (const auto& id : ids) {
    auto it = state.authorities().find(id);
    if (it == state.authorities().end() || !it->second.commitment || !it->second.opening_rloc) {
      fail(Errc::IncompleteOpenings, "authority " + id + " has not opened", id);
    }
  }
  for (const auto& id : ids) seeds.push_back(verified_opening(store, id, state.authorities().at(id)));
  return crypto::global_setup(combine_seeds(seeds));
}

CeremonyState observe(ledger::Ledger& ledger, const store::DataStore& store) {
  auto state = ledger.state();
  CeremonyState out;
  out.authorities = state.registered_authorities();
  bool any_opening = false;
  for (const auto& [id, entry] : state.authorities()) {
    if (entry.commitment) out.commitments.emplace(id, *entry.commitment);
    if (entry.opening_rloc) {
      any_opening = true;
      try {
        out.openings.emplace(id, verified_opening(store, id, entry));
      } catch (const Error&) {
        // reported through finalize below
      }
    }
  }
  if (!any_opening && !state.all_committed()) {
    out.phase = Phase::CollectingCommitments;
    return out;
  }
  try {
    out.result = finalize(ledger, store);
    out.phase = Phase::Finalized;
  } catch (const Error& e) {
    if (e.code() == Errc::CommitmentMismatch) {
      out.phase = Phase::Aborted;
      out.offender = e.detail();
    } else {
      out.phase = Phase::CollectingOpenings;
    }
  }
  return out;
}

Participant::Participant(std::string authority_id, std::string address, ledger::Ledger& ledger,
                         store::DataStore& store)
    : authority_id_(std::move(authority_id)),
      address_(std::move(address)),
      ledger_(ledger),
      store_(store) {}

store::Rloc Participant::publish_metadata(const MetadataDocument& doc) {
  auto rloc = store_.put(as_bytes(doc.encode()));
  ledger_.authority_post_metadata(address_, authority_id_, rloc, doc.ids());
  return rloc;
}

crypto::Commitment Participant::commit_round(Rng& rng) {
  auto state = ledger_.state();
  for (const auto& [id, entry] : state.authorities()) {
    if (entry.opening_rloc) {
      fail(Errc::WrongPhase, "openings have begun; commitments are closed", id);
    }
  }
  auto seed = rng.draw<32>();
  auto c = crypto::commit(seed);
  ledger_.authority_post_commitment(address_, authority_id_, c);
  seed_ = seed;
  return c;
}

store::Rloc Participant::open_round() {
  if (!seed_) fail(Errc::WrongPhase, "no committed seed held for " + authority_id_, authority_id_);
  if (!ledger_.state().all_committed()) {
    fail(Errc::OpeningBeforeAllCommitments, "not every authority has committed", authority_id_);
  }
  auto rloc = store_.put(*seed_);
  ledger_.authority_post_opening(address_, authority_id_, rloc);
  return rloc;
}

crypto::PublicParameters Participant::finalize() {
  auto params = ceremony::finalize(ledger_, store_);
  auto rloc = store_.put(params.serialize());
  auto entry = ledger_.authority_get(authority_id_);
  if (!entry || !entry->params_rloc) ledger_.authority_post_params(address_, authority_id_, rloc);
  return params;
}

Participant::PublishedKeys Participant::publish_keys(const crypto::PublicParameters& params,
                                                     Rng& rng) {
  auto state = observe(ledger_, store_);
  if (state.phase != Phase::Finalized) {
    fail(Errc::WrongPhase, "ceremony is " + std::string(phase_name(state.phase)) + ", not Finalized",
         authority_id_);
  }
  if (!(*state.result == params)) {
    fail(Errc::InvalidArgument, "parameters differ from the ceremony outcome", authority_id_);
  }
  auto keypair = crypto::auth_setup(params, authority_id_, rng);
  auto rloc = store_.put(keypair.public_key.serialize());
  ledger_.authority_post_public_key(address_, authority_id_, rloc);
  return {rloc, std::move(keypair)};
}

}  // namespace martsia::ceremony
